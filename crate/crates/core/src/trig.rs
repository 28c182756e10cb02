//! Sparse trigonometric polynomials `P(t) = sum_k c_k e^{i n_k t}` on the
//! circle with its probability measure, and uniform-grid quadrature of their
//! `L^q` norms.

use std::collections::HashSet;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::norms::{lp_norm_values, Exponent};

#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    terms: Vec<(i64, Complex64)>,
}

impl TrigPolynomial {
    /// Frequencies must be distinct.
    pub fn new(terms: Vec<(i64, Complex64)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(terms.len());
        for &(k, c) in &terms {
            if !seen.insert(k) {
                return Err(Error::Degenerate(format!("frequency {k} appears twice")));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::OutOfRange("coefficients must be finite".into()));
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(i64, Complex64)] {
        &self.terms
    }

    pub fn max_abs_frequency(&self) -> u64 {
        self.terms
            .iter()
            .map(|(k, _)| k.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn evaluate(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(k, c)| c * Complex64::from_polar(1.0, k as f64 * t))
            .sum()
    }

    /// `||P||_2`, which by orthogonality is the `l^2` norm of the coefficients.
    pub fn l2_norm_exact(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, c)| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `P(2 pi j / M)` for `j = 0..M`. Exact up to rounding for any `M`,
    /// since `e^{i k t_j}` depends only on `k mod M`.
    pub fn sample_uniform(&self, m: usize) -> Result<Vec<Complex64>> {
        if m == 0 {
            return Err(Error::OutOfRange("grid size must be positive".into()));
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for &(k, c) in &self.terms {
            buf[k.rem_euclid(m as i64) as usize] += c;
        }
        FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
        Ok(buf)
    }

    /// `(1/M sum_j |P(t_j)|^q)^{1/q}` on the uniform `M`-point grid. Requires
    /// `M >= 8 * max |n_k|` so that the sampled modulus is well resolved.
    pub fn lq_norm_quadrature(&self, q: Exponent, m: usize) -> Result<f64> {
        let need = 8 * self.max_abs_frequency().max(1);
        if (m as u64) < need {
            return Err(Error::OutOfRange(format!(
                "grid too coarse: M = {m}, need at least {need}"
            )));
        }
        let samples = self.sample_uniform(m)?;
        Ok(lp_norm_values(&samples, 1.0 / m as f64, q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn samples_match_direct_evaluation() {
        let p = TrigPolynomial::new(vec![
            (3, Complex64::new(1.0, 0.5)),
            (-5, Complex64::new(-0.25, 0.0)),
            (17, Complex64::new(0.0, 2.0)),
        ])
        .unwrap();
        let m = 160;
        let s = p.sample_uniform(m).unwrap();
        for (j, v) in s.iter().enumerate() {
            let t = 2.0 * PI * j as f64 / m as f64;
            assert!((v - p.evaluate(t)).norm() < 1e-12);
        }
    }

    #[test]
    fn quadrature_reproduces_parseval_and_rejects_coarse_grids() {
        let p = TrigPolynomial::new(vec![
            (2, Complex64::new(1.0, 0.0)),
            (4, Complex64::new(0.5, -0.5)),
        ])
        .unwrap();
        let two = Exponent::from_p(2.0).unwrap();
        let q = p.lq_norm_quadrature(two, 32).unwrap();
        assert!((q - p.l2_norm_exact()).abs() < 1e-14);
        assert!(p.lq_norm_quadrature(two, 31).is_err());
        assert!(TrigPolynomial::new(vec![(1, Complex64::new(1.0, 0.0)); 2]).is_err());
    }
}
