//! Families of functions whose norm ratio `||f^||_q / ||f||_p` grows without
//! bound in the infinite regions, realised on finite groups.
//!
//! | family              | group                      | ratio                           |
//! |---------------------|----------------------------|---------------------------------|
//! | `arc_indicator`     | `Z/m` compact              | `>= (3^{u-1}/2) k^{u+v-1}`      |
//! | `subgroup_indicator`| `(Z/r)^n` compact          | `r^{n(u+v-1)}`                  |
//! | `full_orbit`        | `Z/m` discrete             | `m^{1-u-v}`                     |
//! | `chirp`             | `(Z/r)^{2n}` compact       | `r^{n(2v-1)}`                   |
//! | `lacunary_compact`  | `Z/m` compact              | grows like `(sum a_k^q)^{1/q}`  |
//! | `lacunary_discrete` | `Z`, support `{-2^k}`      | `||f^||_q` grows, `||f||_p` bounded |
//! | `clt_delta`         | `(Z/r)^n` discrete         | tail of `Re f^` near Gaussian   |
//!
//! Here `u = 1/p`, `v = 1/q`.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{forward, inverse, MeasuredFunction, Side};
use crate::group::{is_prime, root_of_unity, GroupElement, GroupSpec, View, EXHAUSTIVE_CAP};
use crate::norms::{lp_norm, Exponent};
use crate::trig::TrigPolynomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionKind {
    Exact,
    LowerBound,
}

impl PredictionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PredictionKind::Exact => "exact",
            PredictionKind::LowerBound => "lower_bound",
        }
    }
}

impl fmt::Display for PredictionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One member of a witness family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessPoint {
    pub family: String,
    pub param_n: u64,
    pub group_descr: String,
    /// Size parameter used for growth fits (group order, or the span of the
    /// support for the lacunary series on `Z`).
    pub group_size: u64,
    pub p: Exponent,
    pub q: Exponent,
    pub norm_f: f64,
    pub norm_fhat: f64,
    pub ratio: f64,
    pub prediction: Option<f64>,
    pub prediction_kind: Option<PredictionKind>,
}

impl WitnessPoint {
    #[allow(clippy::too_many_arguments)]
    fn new(
        family: &str,
        param_n: u64,
        group_descr: String,
        group_size: u64,
        p: Exponent,
        q: Exponent,
        norm_f: f64,
        norm_fhat: f64,
        prediction: Option<(f64, PredictionKind)>,
    ) -> Self {
        Self {
            family: family.to_string(),
            param_n,
            group_descr,
            group_size,
            p,
            q,
            norm_f,
            norm_fhat,
            ratio: norm_fhat / norm_f,
            prediction: prediction.map(|(v, _)| v),
            prediction_kind: prediction.map(|(_, k)| k),
        }
    }

    /// Whether the measured ratio agrees with the prediction: within `1e-9`
    /// relative for exact predictions, not below `(1 - 1e-9)` times it for
    /// lower bounds. Vacuously true without a prediction.
    pub fn meets_prediction(&self) -> bool {
        match (self.prediction, self.prediction_kind) {
            (Some(pred), Some(PredictionKind::Exact)) => {
                (self.ratio - pred).abs() <= 1e-9 * pred.abs()
            }
            (Some(pred), Some(PredictionKind::LowerBound)) => self.ratio >= pred * (1.0 - 1e-9),
            _ => true,
        }
    }
}

fn require_prime(r: usize) -> Result<()> {
    if is_prime(r as u64) {
        Ok(())
    } else {
        Err(Error::NotPrime(r as u64))
    }
}

fn elementary_size(r: usize, n: usize) -> Result<usize> {
    let size = (r as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if n == 0 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    if size > EXHAUSTIVE_CAP as u128 {
        return Err(Error::Capacity {
            size,
            cap: EXHAUSTIVE_CAP,
        });
    }
    Ok(size as usize)
}

/// Transform entries below this fraction of `||f||_1` (which bounds `|f^|`)
/// are rounding residue of exact zeros. They are flushed before measuring,
/// since quasi-norms with `q < 1` would otherwise magnify them.
pub const TRANSFORM_RESOLUTION: f64 = 1e-13;

fn norms_of(f: &MeasuredFunction, p: Exponent, q: Exponent) -> Result<(f64, f64)> {
    let mut fh = forward(f)?;
    let floor = TRANSFORM_RESOLUTION * lp_norm(f, Exponent::from_p(1.0)?);
    for z in fh.values_mut() {
        if z.norm() <= floor {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    Ok((lp_norm(f, p), lp_norm(&fh, q)))
}

/// Normalized indicator of `U_k = {x in Z/m : |x| < m/(6k)}`, the preimage
/// of the arc of half-width `pi/(3k)` around 1 under `x -> e^{2 pi i x/m}`.
/// Requires `m >= 100 k` so the grid resolves the arc.
pub fn arc_indicator_witness(k: usize, m: usize, p: Exponent, q: Exponent) -> Result<WitnessPoint> {
    if k == 0 {
        return Err(Error::OutOfRange("k must be at least 1".into()));
    }
    if m < 100 * k {
        return Err(Error::OutOfRange(format!(
            "m = {m} is below 100 k = {}",
            100 * k
        )));
    }
    let spec = GroupSpec::compact(&[m])?;
    spec.check_capacity()?;
    let inside = |x: usize| {
        let centered = x.min(m - x);
        6 * k * centered < m
    };
    let count = (0..m).filter(|&x| inside(x)).count();
    let height = m as f64 / count as f64;
    let f = MeasuredFunction::from_fn(&spec, Side::Time, |x| {
        Complex64::new(if inside(x[0]) { height } else { 0.0 }, 0.0)
    })?;
    let (nf, nfh) = norms_of(&f, p, q)?;
    let (u, v) = (p.reciprocal(), q.reciprocal());
    let pred = 3f64.powf(u - 1.0) / 2.0 * (k as f64).powf(u + v - 1.0);
    Ok(WitnessPoint::new(
        "arc_indicator",
        k as u64,
        spec.to_string(),
        m as u64,
        p,
        q,
        nf,
        nfh,
        Some((pred, PredictionKind::LowerBound)),
    ))
}

/// On `(Z/r)^n` (compact, mass 1): `M_n` is generated by the coordinate
/// vectors, `H_n` is its annihilator, and `f = r^n 1_{H_n}`.
pub fn subgroup_indicator_witness(
    r: usize,
    n: usize,
    p: Exponent,
    q: Exponent,
) -> Result<WitnessPoint> {
    require_prime(r)?;
    let size = elementary_size(r, n)?;
    let spec = GroupSpec::elementary(r, n, View::Compact)?;
    let gens: Vec<GroupElement> = (0..n)
        .map(|j| {
            let mut e = vec![0; n];
            e[j] = 1;
            GroupElement(e)
        })
        .collect();
    let m_n = spec.subgroup_from_generators(&gens)?;
    let h_n = spec.annihilator(&m_n)?;
    let height = size as f64;
    let mut f = MeasuredFunction::zeros(&spec, Side::Time)?;
    for &i in h_n.indices() {
        f.values_mut()[i] = Complex64::new(height, 0.0);
    }
    let (nf, nfh) = norms_of(&f, p, q)?;
    let pred = height.powf(p.reciprocal() + q.reciprocal() - 1.0);
    Ok(WitnessPoint::new(
        "subgroup_indicator",
        n as u64,
        spec.to_string(),
        size as u64,
        p,
        q,
        nf,
        nfh,
        Some((pred, PredictionKind::Exact)),
    ))
}

/// On `Z/m` (discrete, unit atoms): the orbit `{g, 2g, ..., mg}` of the
/// generator `g = 1`, i.e. the all-ones function.
pub fn full_orbit_witness(m: usize, p: Exponent, q: Exponent) -> Result<WitnessPoint> {
    let spec = GroupSpec::discrete(&[m])?;
    spec.check_capacity()?;
    let g = GroupElement(vec![1 % m]);
    let mut f = MeasuredFunction::zeros(&spec, Side::Time)?;
    let mut x = g.clone();
    for _ in 0..m {
        f.values_mut()[spec.index_of(&x.0)?] += Complex64::new(1.0, 0.0);
        x = spec.add(&x, &g)?;
    }
    let (nf, nfh) = norms_of(&f, p, q)?;
    let pred = (m as f64).powf(1.0 - p.reciprocal() - q.reciprocal());
    Ok(WitnessPoint::new(
        "full_orbit",
        m as u64,
        spec.to_string(),
        m as u64,
        p,
        q,
        nf,
        nfh,
        Some((pred, PredictionKind::Exact)),
    ))
}

/// On `(Z/r)^{2n}` (compact, mass 1): `f(a, b) = w^{a.b}` with
/// `w = e^{2 pi i / r}`. `|f| = 1`, so `||f||_p = 1` for every `p`; the point
/// records `p = 2`.
pub fn chirp_witness(r: usize, n: usize, q: Exponent) -> Result<WitnessPoint> {
    require_prime(r)?;
    let size = elementary_size(r, 2 * n)?;
    let spec = GroupSpec::elementary(r, 2 * n, View::Compact)?;
    let f = chirp_function(&spec, r, n)?;
    let p = Exponent::from_p(2.0)?;
    let (nf, nfh) = norms_of(&f, p, q)?;
    let pred = (r as f64).powf(n as f64 * (2.0 * q.reciprocal() - 1.0));
    Ok(WitnessPoint::new(
        "chirp",
        n as u64,
        spec.to_string(),
        size as u64,
        p,
        q,
        nf,
        nfh,
        Some((pred, PredictionKind::Exact)),
    ))
}

/// `(a, b) -> w^{a.b}` on `(Z/r)^{2n}`.
pub fn chirp_function(spec: &GroupSpec, r: usize, n: usize) -> Result<MeasuredFunction> {
    if spec.orders().len() != 2 * n || spec.orders().iter().any(|&m| m != r) {
        return Err(Error::InvalidSpec(format!("chirp needs (Z/{r})^{}", 2 * n)));
    }
    MeasuredFunction::from_fn(spec, Side::Time, |x| {
        let dot: usize = (0..n).map(|j| x[j] * x[n + j]).sum();
        root_of_unity((dot % r) as u64, r as u64)
    })
}

/// `a_k = e^{i c k log k} / (k^{1/2} (log k)^beta)` for `2 <= k <= big_n`,
/// returned as `(k, a_k)`.
pub fn lacunary_coefficients(big_n: usize, beta: f64, c: f64) -> Result<Vec<(i64, Complex64)>> {
    if big_n < 3 {
        return Err(Error::OutOfRange(format!(
            "N must be at least 3, got {big_n}"
        )));
    }
    if !(beta.is_finite() && beta > 1.0) {
        return Err(Error::OutOfRange(format!("beta must exceed 1, got {beta}")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::OutOfRange(format!("c must be positive, got {c}")));
    }
    Ok((2..=big_n)
        .map(|k| {
            let kf = k as f64;
            let ln = kf.ln();
            let modulus = 1.0 / (kf.sqrt() * ln.powf(beta));
            (k as i64, Complex64::from_polar(modulus, c * kf * ln))
        })
        .collect())
}

/// On `Z/m` (compact, mass 1): `f = sum_{k=2}^{m-1} a_k chi^k`, so that
/// `f^(k) = a_k`. Needs `q < 2`.
///
/// The prediction is the lower bound `(sum |a_k|^q)^{1/q} / ||f||_inf`,
/// valid because `||f||_p <= ||f||_inf` on a probability space.
pub fn lacunary_compact_witness(
    m: usize,
    beta: f64,
    c: f64,
    p: Exponent,
    q: Exponent,
) -> Result<WitnessPoint> {
    if q.reciprocal() <= 0.5 {
        return Err(Error::InvalidExponent(format!(
            "needs q < 2, got q = {}",
            q.p()
        )));
    }
    if m < 4 {
        return Err(Error::OutOfRange(format!("m must be at least 4, got {m}")));
    }
    let coeffs = lacunary_coefficients(m - 1, beta, c)?;
    let spec = GroupSpec::compact(&[m])?;
    spec.check_capacity()?;
    let mut big_f = MeasuredFunction::zeros(&spec, Side::Frequency)?;
    for &(k, a) in &coeffs {
        big_f.values_mut()[k as usize] = a;
    }
    let f = inverse(&big_f)?;
    let (nf, nfh) = norms_of(&f, p, q)?;
    let coeff_sum =
        crate::norms::lp_norm_values(&coeffs.iter().map(|(_, a)| *a).collect::<Vec<_>>(), 1.0, q);
    let sup = lp_norm(&f, Exponent::INFINITY);
    Ok(WitnessPoint::new(
        "lacunary_compact",
        m as u64,
        spec.to_string(),
        m as u64,
        p,
        q,
        nf,
        nfh,
        Some((coeff_sum / sup, PredictionKind::LowerBound)),
    ))
}

/// `(sum_k |a_k|^q)^{1/q}` for the lacunary coefficients `2 <= k <= m - 1`.
pub fn lacunary_coefficient_norm(m: usize, beta: f64, c: f64, q: Exponent) -> Result<f64> {
    let coeffs = lacunary_coefficients(m.saturating_sub(1), beta, c)?;
    Ok(crate::norms::lp_norm_values(
        &coeffs.iter().map(|(_, a)| *a).collect::<Vec<_>>(),
        1.0,
        q,
    ))
}

/// Largest quadrature grid accepted by [`lacunary_discrete_witness`].
pub const MAX_GRID: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LacunaryDiscreteReport {
    pub point: WitnessPoint,
    pub transform: TrigPolynomial,
    /// `||f^||_2` from the quadrature grid.
    pub l2_quadrature: f64,
    /// `(sum_{k <= n} 1/k)^{1/2}`.
    pub l2_exact: f64,
}

impl Serialize for TrigPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.terms().len()))?;
        for (k, c) in self.terms() {
            seq.serialize_element(&(k, c.re, c.im))?;
        }
        seq.end()
    }
}

/// On `Z` (discrete, unit atoms): `f = sum_{k=1}^n k^{-1/2} 1_{-2^k}`, whose
/// transform on the circle is `sum_k k^{-1/2} e^{i 2^k t}`. `||f^||_q` is
/// computed on a uniform grid of `grid` points, which must satisfy
/// `grid >= 8 * 2^n`; the grid's `||f^||_2` must reproduce Parseval to `1e-6`.
///
/// Prediction: exact for `q = 2`; for `q > 2`, `||f^||_q >= ||f^||_2` gives a
/// lower bound; none for `q < 2`.
pub fn lacunary_discrete_witness(
    n: usize,
    p: Exponent,
    q: Exponent,
    grid: usize,
) -> Result<LacunaryDiscreteReport> {
    if n == 0 || n > 20 {
        return Err(Error::OutOfRange(format!("n must lie in 1..=20, got {n}")));
    }
    if p.reciprocal() >= 0.5 {
        return Err(Error::InvalidExponent(format!(
            "needs p > 2, got p = {}",
            p.p()
        )));
    }
    if grid > MAX_GRID {
        return Err(Error::Capacity {
            size: grid as u128,
            cap: MAX_GRID,
        });
    }
    let weights: Vec<f64> = (1..=n).map(|k| 1.0 / (k as f64).sqrt()).collect();
    let terms = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| (1i64 << (i + 1), Complex64::new(w, 0.0)))
        .collect();
    let poly = TrigPolynomial::new(terms)?;
    let norm_f = crate::norms::lp_norm_values(&weights, 1.0, p);
    let norm_fhat = poly.lq_norm_quadrature(q, grid)?;
    let l2_quadrature = poly.lq_norm_quadrature(Exponent::from_p(2.0)?, grid)?;
    let l2_exact = poly.l2_norm_exact();
    if (l2_quadrature - l2_exact).abs() > 1e-6 {
        return Err(Error::Degenerate(format!(
            "quadrature misses Parseval: {l2_quadrature} vs {l2_exact}"
        )));
    }
    let v = q.reciprocal();
    let prediction = if v == 0.5 {
        Some((l2_exact / norm_f, PredictionKind::Exact))
    } else if v < 0.5 {
        Some((l2_exact / norm_f, PredictionKind::LowerBound))
    } else {
        None
    };
    let point = WitnessPoint::new(
        "lacunary_discrete",
        n as u64,
        format!("lacunary:Z;support=-2^1..-2^{n};grid={grid}"),
        1u64 << n,
        p,
        q,
        norm_f,
        norm_fhat,
        prediction,
    );
    Ok(LacunaryDiscreteReport {
        point,
        transform: poly,
        l2_quadrature,
        l2_exact,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub point: WitnessPoint,
    /// Variance of `Re w^U` for `U` uniform on `Z/r`.
    pub sigma_squared: f64,
    /// `h(n) = (sigma^2 sum_{k <= n} 1/k)^{1/2}`.
    pub threshold: f64,
    /// Dual Haar measure of `{Re f^ >= h(n)}`, by enumeration.
    pub tail_probability: f64,
}

/// On `(Z/r)^n` (discrete, dual mass 1): `f = sum_{k=1}^n k^{-1/2} delta_{-e_k}`,
/// so `f^(g) = sum_k k^{-1/2} g(e_k)` is a sum of independent rotated
/// roots of unity under the dual probability measure.
///
/// The prediction `h(n) P(Re f^ >= h(n))^{1/q} / ||f||_p` is a lower bound
/// because `|f^| >= h(n)` on that event.
pub fn clt_delta_witness(r: usize, n: usize, p: Exponent, q: Exponent) -> Result<CltReport> {
    require_prime(r)?;
    let size = elementary_size(r, n)?;
    let spec = GroupSpec::elementary(r, n, View::Discrete)?;
    let mut f = MeasuredFunction::zeros(&spec, Side::Time)?;
    for k in 0..n {
        let mut e = vec![0; n];
        e[k] = 1;
        let at = spec.neg(&GroupElement(e))?;
        f.values_mut()[spec.index_of(&at.0)?] = Complex64::new(1.0 / ((k + 1) as f64).sqrt(), 0.0);
    }
    let fh = forward(&f)?;
    let sigma_squared = (0..r)
        .map(|j| root_of_unity(j as u64, r as u64).re.powi(2))
        .sum::<f64>()
        / r as f64;
    let harmonic: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
    let threshold = (sigma_squared * harmonic).sqrt();
    let hits = fh.values().iter().filter(|z| z.re >= threshold).count();
    let tail_probability = hits as f64 * spec.dual_atom();
    let nf = lp_norm(&f, p);
    let nfh = lp_norm(&fh, q);
    let pred = threshold * tail_probability.powf(q.reciprocal()) / nf;
    let point = WitnessPoint::new(
        "clt_delta",
        n as u64,
        spec.to_string(),
        size as u64,
        p,
        q,
        nf,
        nfh,
        Some((pred, PredictionKind::LowerBound)),
    );
    Ok(CltReport {
        point,
        sigma_squared,
        threshold,
        tail_probability,
    })
}

/// Least-squares fit of `log ratio` against `log group_size`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits the last two-thirds of `points` (at least two of them). Needs at
/// least three points with strictly increasing sizes.
pub fn fit_growth(points: &[WitnessPoint]) -> Result<GrowthFit> {
    if points.len() < 3 {
        return Err(Error::Degenerate(format!(
            "growth fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points
        .windows(2)
        .any(|w| w[1].group_size <= w[0].group_size)
    {
        return Err(Error::Degenerate(
            "group sizes must strictly increase".into(),
        ));
    }
    if points
        .iter()
        .any(|pt| !(pt.ratio > 0.0 && pt.ratio.is_finite()))
    {
        return Err(Error::Degenerate(
            "ratios must be positive and finite".into(),
        ));
    }
    let keep = (2 * points.len()).div_ceil(3).max(2);
    let tail = &points[points.len() - keep..];
    let xs: Vec<f64> = tail.iter().map(|pt| (pt.group_size as f64).ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|pt| pt.ratio.ln()).collect();
    Ok(least_squares(&xs, &ys))
}

fn least_squares(xs: &[f64], ys: &[f64]) -> GrowthFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy <= f64::EPSILON * f64::EPSILON * n {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    GrowthFit {
        slope,
        intercept,
        r_squared,
    }
}
