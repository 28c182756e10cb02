//! The Fourier transform `f^(gamma) = sum_x f(x) gamma(-x) a({x})` and its
//! inverse, under the Haar normalization carried by [`GroupSpec`].
//!
//! Two evaluation paths exist. The direct path sums over all pairs with roots
//! of unity taken from exact rational angles; it is the reference. The fast
//! path applies one-dimensional DFTs along each cyclic factor in turn and is
//! what the public entry points use.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::group::{root_of_unity, Character, GroupSpec};

/// Which side of the duality a function lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// The group `X`, weighted by the primal atom.
    Time,
    /// The dual group, weighted by the dual atom.
    Frequency,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Time => "time",
            Side::Frequency => "frequency",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "time" => Ok(Side::Time),
            "frequency" | "freq" => Ok(Side::Frequency),
            other => Err(Error::Parse {
                what: "side",
                detail: format!("expected time|frequency, got {other:?}"),
            }),
        }
    }
}

/// A complex function on the group (or its dual) with canonical ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredFunction {
    spec: GroupSpec,
    side: Side,
    values: Vec<Complex64>,
}

impl MeasuredFunction {
    pub fn new(spec: GroupSpec, side: Side, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.size() {
            return Err(Error::ShapeMismatch {
                expected: spec.size(),
                found: values.len(),
            });
        }
        if values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::OutOfRange("function values must be finite".into()));
        }
        Ok(Self { spec, side, values })
    }

    pub fn zeros(spec: &GroupSpec, side: Side) -> Result<Self> {
        let n = spec.check_capacity()?;
        Ok(Self {
            spec: spec.clone(),
            side,
            values: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    /// Builds a function from a closure over residue tuples.
    pub fn from_fn(
        spec: &GroupSpec,
        side: Side,
        mut f: impl FnMut(&[usize]) -> Complex64,
    ) -> Result<Self> {
        let n = spec.check_capacity()?;
        let values = (0..n).map(|i| f(&spec.residues_at(i))).collect();
        Self::new(spec.clone(), side, values)
    }

    /// Indicator of a single point.
    pub fn delta(spec: &GroupSpec, side: Side, at: &[usize]) -> Result<Self> {
        let mut out = Self::zeros(spec, side)?;
        let i = spec.index_of(at)?;
        out.values[i] = Complex64::new(1.0, 0.0);
        Ok(out)
    }

    /// The character `x -> chi(x)` as a function on the group.
    pub fn character(spec: &GroupSpec, chi: &Character) -> Result<Self> {
        let chi = spec.character(&chi.0)?;
        let table = roots_table(spec.exponent());
        Self::from_fn(spec, Side::Time, |x| {
            table[spec.pairing_phase_unchecked(&chi.0, x).numerator as usize]
        })
    }

    pub fn constant(spec: &GroupSpec, side: Side, c: Complex64) -> Result<Self> {
        let n = spec.check_capacity()?;
        Self::new(spec.clone(), side, vec![c; n])
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Haar weight of each point on this function's side.
    pub fn atom(&self) -> f64 {
        match self.side {
            Side::Time => self.spec.primal_atom(),
            Side::Frequency => self.spec.dual_atom(),
        }
    }

    /// Total Haar mass of this function's side.
    pub fn total_mass(&self) -> f64 {
        self.atom() * self.values.len() as f64
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            spec: self.spec.clone(),
            side: self.side,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Same values, reinterpreted on another normalization of the same group.
    pub fn with_spec(&self, spec: GroupSpec) -> Result<Self> {
        if spec.orders() != self.spec.orders() {
            return Err(Error::InvalidSpec("cyclic orders differ".into()));
        }
        Ok(Self {
            spec,
            side: self.side,
            values: self.values.clone(),
        })
    }

    /// `x -> f(-x)`.
    pub fn reflected(&self) -> Self {
        let values = (0..self.values.len())
            .map(|i| self.values[self.spec.neg_index(i)])
            .collect();
        Self {
            spec: self.spec.clone(),
            side: self.side,
            values,
        }
    }

    /// `sqrt(sum |f|^2 * atom)`.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.atom()).sqrt()
    }

    /// Largest absolute difference against another function on the same grid.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn roots_table(den: u64) -> Vec<Complex64> {
    (0..den).map(|k| root_of_unity(k, den)).collect()
}

#[derive(Clone, Copy)]
enum Kernel {
    /// `exp(-2 pi i <gamma, x>)`
    Negative,
    /// `exp(+2 pi i <gamma, x>)`
    Positive,
}

fn expect_side(f: &MeasuredFunction, side: Side) -> Result<()> {
    if f.side != side {
        return Err(Error::WrongSide {
            expected: side.as_str(),
            found: f.side.as_str(),
        });
    }
    Ok(())
}

/// `f^(gamma) = sum_x f(x) gamma(-x) a({x})`.
pub fn forward(f: &MeasuredFunction) -> Result<MeasuredFunction> {
    expect_side(f, Side::Time)?;
    let values = apply_fast(&f.spec, &f.values, Kernel::Negative, f.spec.primal_atom());
    Ok(MeasuredFunction {
        spec: f.spec.clone(),
        side: Side::Frequency,
        values,
    })
}

/// `f(x) = sum_gamma F(gamma) gamma(x) a^({gamma})`.
pub fn inverse(big_f: &MeasuredFunction) -> Result<MeasuredFunction> {
    expect_side(big_f, Side::Frequency)?;
    let values = apply_fast(
        &big_f.spec,
        &big_f.values,
        Kernel::Positive,
        big_f.spec.dual_atom(),
    );
    Ok(MeasuredFunction {
        spec: big_f.spec.clone(),
        side: Side::Time,
        values,
    })
}

/// Reference `O(N^2)` forward transform.
pub fn forward_direct(f: &MeasuredFunction) -> Result<MeasuredFunction> {
    expect_side(f, Side::Time)?;
    let values = apply_direct(&f.spec, &f.values, Kernel::Negative, f.spec.primal_atom());
    Ok(MeasuredFunction {
        spec: f.spec.clone(),
        side: Side::Frequency,
        values,
    })
}

/// Reference `O(N^2)` inverse transform.
pub fn inverse_direct(big_f: &MeasuredFunction) -> Result<MeasuredFunction> {
    expect_side(big_f, Side::Frequency)?;
    let values = apply_direct(
        &big_f.spec,
        &big_f.values,
        Kernel::Positive,
        big_f.spec.dual_atom(),
    );
    Ok(MeasuredFunction {
        spec: big_f.spec.clone(),
        side: Side::Time,
        values,
    })
}

/// Transforms twice: first on `X`, then regards `f^` as a function on the
/// dual group (whose own dual is `X`) and transforms again with the dual Haar
/// measure. The result lives on `X` and equals `x -> f(-x)`.
pub fn double_transform(f: &MeasuredFunction) -> Result<MeasuredFunction> {
    let once = forward(f)?;
    let values = apply_fast(&f.spec, &once.values, Kernel::Negative, f.spec.dual_atom());
    Ok(MeasuredFunction {
        spec: f.spec.clone(),
        side: Side::Time,
        values,
    })
}

/// `| ||f||_2 - ||f^||_2 |` for a time-side function.
pub fn parseval_defect(f: &MeasuredFunction) -> Result<f64> {
    let fh = forward(f)?;
    Ok((f.l2_norm() - fh.l2_norm()).abs())
}

/// Applies `sum_gamma K(gamma) exp(+-2 pi i <gamma, x>) * weight` for a raw
/// coefficient vector. Used by the estimator for adjoint products.
pub(crate) fn kernel_positive(
    spec: &GroupSpec,
    values: &[Complex64],
    weight: f64,
) -> Vec<Complex64> {
    apply_fast(spec, values, Kernel::Positive, weight)
}

pub(crate) fn kernel_negative(
    spec: &GroupSpec,
    values: &[Complex64],
    weight: f64,
) -> Vec<Complex64> {
    apply_fast(spec, values, Kernel::Negative, weight)
}

fn apply_direct(
    spec: &GroupSpec,
    values: &[Complex64],
    kernel: Kernel,
    weight: f64,
) -> Vec<Complex64> {
    let n = values.len();
    let den = spec.exponent();
    let table = roots_table(den);
    let residues: Vec<Vec<usize>> = (0..n).map(|i| spec.residues_at(i)).collect();
    (0..n)
        .map(|g| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, v) in values.iter().enumerate() {
                if *v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let k = spec
                    .pairing_phase_unchecked(&residues[g], &residues[x])
                    .numerator;
                let k = match kernel {
                    Kernel::Positive => k,
                    Kernel::Negative => (den - k) % den,
                };
                acc += v * table[k as usize];
            }
            acc * weight
        })
        .collect()
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, kernel: Kernel) -> Arc<dyn Fft<f64>> {
    let dir = match kernel {
        Kernel::Negative => FftDirection::Forward,
        Kernel::Positive => FftDirection::Inverse,
    };
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, dir))
}

fn apply_fast(
    spec: &GroupSpec,
    values: &[Complex64],
    kernel: Kernel,
    weight: f64,
) -> Vec<Complex64> {
    let n = values.len();
    let mut data = values.to_vec();
    let mut lines = vec![Complex64::new(0.0, 0.0); n];
    let orders = spec.orders();
    let mut stride = 1usize;
    for &m in orders.iter().rev() {
        let fft = plan(m, kernel);
        if stride == 1 {
            fft.process(&mut data);
        } else {
            // Gather every line of this axis contiguously, transform, scatter.
            let block = m * stride;
            let mut w = 0;
            for base in (0..n).step_by(block) {
                for t in 0..stride {
                    for k in 0..m {
                        lines[w] = data[base + k * stride + t];
                        w += 1;
                    }
                }
            }
            fft.process(&mut lines);
            let mut r = 0;
            for base in (0..n).step_by(block) {
                for t in 0..stride {
                    for k in 0..m {
                        data[base + k * stride + t] = lines[r];
                        r += 1;
                    }
                }
            }
        }
        stride *= m;
    }
    for v in &mut data {
        *v *= weight;
    }
    data
}
