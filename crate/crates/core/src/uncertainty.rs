//! Renyi entropies and entropic uncertainty principles.
//!
//! For `psi` with `||psi||_2 = 1`, both `|psi|^2` and `|psi^|^2` are
//! probability densities with respect to the two Haar measures. Writing
//! `h_a` for the Renyi entropy of order `a` and `(u, v) = (1/p, 1/q)`:
//!
//! * weighted: `(u - 1/2) h_{p/2}(|psi|^2) + (1/2 - v) h_{q/2}(|psi^|^2) >= -log C_{p,q}`
//!   on `U_C` (compact: `u + v <= 1`, `u > 1/2`) and `U_D` (discrete:
//!   `u + v >= 1`, `v < 1/2`). It fails on `U_CN` (compact: `u + v > 1`,
//!   `v <= 1/2`) and `U_DN` (discrete: `u + v < 1`, `u >= 1/2`), where the
//!   left side is unbounded below.
//! * unweighted: `h_{p/2}(|psi|^2) + h_{q/2}(|psi^|^2) >= 0` when `u + v >= 1`.
//! * supports: `a(supp psi) a^(supp psi^) >= 1`, and with atoms `1/sqrt N` on
//!   both sides, `N_t N_w >= N`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{forward, MeasuredFunction, Side};
use crate::group::{GroupSpec, View, EXHAUSTIVE_CAP};
use crate::norms::Exponent;
use crate::region::closed_form_cpq;

/// Entries at or below this fraction of the maximum modulus count as zero.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

/// A nonnegative function with total Haar mass 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    base: MeasuredFunction,
}

impl Density {
    pub fn new(base: MeasuredFunction) -> Result<Self> {
        if base.values().iter().any(|z| z.im != 0.0 || z.re < 0.0) {
            return Err(Error::OutOfRange(
                "density values must be real and nonnegative".into(),
            ));
        }
        let total: f64 = base.values().iter().map(|z| z.re).sum::<f64>() * base.atom();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::OutOfRange(format!(
                "density integrates to {total}, not 1"
            )));
        }
        Ok(Self { base })
    }

    /// `|psi|^2` for `||psi||_2 = 1`.
    pub fn from_amplitude(psi: &MeasuredFunction) -> Result<Self> {
        let values = psi
            .values()
            .iter()
            .map(|z| Complex64::new(z.norm_sqr(), 0.0))
            .collect();
        Self::new(MeasuredFunction::new(
            psi.spec().clone(),
            psi.side(),
            values,
        )?)
    }

    pub fn base(&self) -> &MeasuredFunction {
        &self.base
    }

    fn reals(&self) -> impl Iterator<Item = f64> + '_ {
        self.base.values().iter().map(|z| z.re)
    }
}

/// `h_a(f) = (1/(1-a)) log sum f^a w` for `a in (0,1) u (1, inf)`.
pub fn renyi_entropy(d: &Density, order: f64) -> Result<f64> {
    if !(order.is_finite() && order > 0.0 && order != 1.0) {
        return Err(Error::OutOfRange(format!(
            "Renyi order must lie in (0,1) u (1,inf), got {order}; see renyi_entropy_extended"
        )));
    }
    let atom = d.base.atom();
    let max = d.reals().fold(0.0, f64::max);
    let s: f64 = d
        .reals()
        .filter(|&x| x > 0.0)
        .map(|x| (x / max).powf(order))
        .sum();
    Ok((order * max.ln() + (s * atom).ln()) / (1.0 - order))
}

/// [`renyi_entropy`] extended by its limits: order `0` gives the log measure
/// of the support, order `1` the Shannon entropy, order `inf` `-log max f`.
pub fn renyi_entropy_extended(d: &Density, order: f64) -> Result<f64> {
    let atom = d.base.atom();
    if order == 0.0 {
        let count = d.reals().filter(|&x| x > 0.0).count();
        return Ok((count as f64 * atom).ln());
    }
    if order == 1.0 {
        return Ok(-d
            .reals()
            .filter(|&x| x > 0.0)
            .map(|x| x * x.ln())
            .sum::<f64>()
            * atom);
    }
    if order == f64::INFINITY {
        return Ok(-d.reals().fold(0.0, f64::max).ln());
    }
    renyi_entropy(d, order)
}

/// Outcome of an inequality check `lhs >= rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UPReport {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
}

impl UPReport {
    fn new(lhs: f64, rhs: f64) -> Self {
        let margin = lhs - rhs;
        Self {
            lhs,
            rhs,
            margin,
            satisfied: margin >= -1e-9,
        }
    }
}

/// Renyi order `p/2` as used for `|psi|^2`, with `p = inf` giving `inf`.
fn half_order(e: Exponent) -> f64 {
    e.p() / 2.0
}

fn entropy_pair(psi: &MeasuredFunction, p: Exponent, q: Exponent) -> Result<(f64, f64)> {
    if psi.side() != Side::Time {
        return Err(Error::WrongSide {
            expected: "time",
            found: psi.side().as_str(),
        });
    }
    let dt = Density::from_amplitude(psi)?;
    let df = Density::from_amplitude(&forward(psi)?)?;
    Ok((
        renyi_entropy_extended(&dt, half_order(p))?,
        renyi_entropy_extended(&df, half_order(q))?,
    ))
}

/// Which region of the weighted inequality `(u, v)` lies in, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightedRegion {
    /// Inequality holds (`U_C` or `U_D`).
    Holds,
    /// Inequality fails for some density (`U_CN` or `U_DN`).
    Fails,
    Neither,
}

pub fn weighted_region(view: View, u: f64, v: f64) -> WeightedRegion {
    let s = u + v;
    match view {
        View::Compact if s <= 1.0 && u > 0.5 => WeightedRegion::Holds,
        View::Compact if s > 1.0 && v <= 0.5 => WeightedRegion::Fails,
        View::Discrete if s >= 1.0 && v < 0.5 => WeightedRegion::Holds,
        View::Discrete if s < 1.0 && u >= 0.5 => WeightedRegion::Fails,
        _ => WeightedRegion::Neither,
    }
}

/// `(u - 1/2) h_{p/2}(|psi|^2) + (1/2 - v) h_{q/2}(|psi^|^2)` without any
/// region check.
pub fn weighted_entropy_sum(psi: &MeasuredFunction, p: Exponent, q: Exponent) -> Result<f64> {
    let (ht, hf) = entropy_pair(psi, p, q)?;
    let (u, v) = (p.reciprocal(), q.reciprocal());
    // A zero weight kills the term even when the entropy is infinite.
    let term = |w: f64, h: f64| if w == 0.0 { 0.0 } else { w * h };
    Ok(term(u - 0.5, ht) + term(0.5 - v, hf))
}

/// Weighted inequality with `rhs = -log C_{p,q}` from the closed form.
pub fn weighted_up_margin(psi: &MeasuredFunction, p: Exponent, q: Exponent) -> Result<UPReport> {
    let spec = psi.spec();
    let (u, v) = (p.reciprocal(), q.reciprocal());
    if weighted_region(spec.view(), u, v) != WeightedRegion::Holds {
        return Err(Error::OutOfRange(format!(
            "({u}, {v}) is outside the region where the weighted inequality holds for the {} view",
            spec.view()
        )));
    }
    let c = closed_form_cpq(spec, p, q)
        .finite()
        .expect("the weighted region lies inside a finite region");
    Ok(UPReport::new(weighted_entropy_sum(psi, p, q)?, -c.ln()))
}

/// Unweighted inequality `h_{p/2}(|psi|^2) + h_{q/2}(|psi^|^2) >= 0`.
pub fn unweighted_up_margin(psi: &MeasuredFunction, p: Exponent, q: Exponent) -> Result<UPReport> {
    let (u, v) = (p.reciprocal(), q.reciprocal());
    if u + v < 1.0 {
        return Err(Error::OutOfRange(format!(
            "needs 1/p + 1/q >= 1, got {}",
            u + v
        )));
    }
    let (ht, hf) = entropy_pair(psi, p, q)?;
    Ok(UPReport::new(ht + hf, 0.0))
}

/// The `copies`-fold tensor power of a function on a small group, kept in
/// factored form. Densities of tensor products are products of densities,
/// so Renyi entropies add over the factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductFunction {
    pub factor: MeasuredFunction,
    pub copies: usize,
}

impl ProductFunction {
    /// Spec of the product group: orders repeated, masses multiplied.
    pub fn spec_string(&self) -> String {
        let fs = self.factor.spec();
        let orders: Vec<String> = (0..self.copies)
            .flat_map(|_| fs.orders().iter().map(|m| m.to_string()))
            .collect();
        format!(
            "cyclic:{};view={};mass={}",
            orders.join("x"),
            fs.view(),
            fs.mass().powi(self.copies as i32)
        )
    }

    /// `log_2` of the number of points.
    pub fn log2_size(&self) -> f64 {
        self.copies as f64 * (self.factor.spec().size() as f64).log2()
    }

    /// Expands to a [`MeasuredFunction`] when the product group fits within
    /// [`EXHAUSTIVE_CAP`].
    pub fn materialize(&self) -> Result<MeasuredFunction> {
        let fs = self.factor.spec();
        let size = (fs.size() as u128)
            .checked_pow(self.copies as u32)
            .unwrap_or(u128::MAX);
        if size > EXHAUSTIVE_CAP as u128 {
            return Err(Error::Capacity {
                size,
                cap: EXHAUSTIVE_CAP,
            });
        }
        let orders: Vec<usize> = (0..self.copies)
            .flat_map(|_| fs.orders().to_vec())
            .collect();
        let spec = GroupSpec::new(orders, fs.view(), fs.mass().powi(self.copies as i32))?;
        let k = fs.size();
        let values = (0..size as usize)
            .map(|mut i| {
                let mut z = Complex64::new(1.0, 0.0);
                for _ in 0..self.copies {
                    z *= self.factor.values()[i % k];
                    i /= k;
                }
                z
            })
            .collect();
        MeasuredFunction::new(spec, Side::Time, values)
    }

    /// Weighted entropy sum of the product, by additivity over factors.
    pub fn weighted_entropy_sum(&self, p: Exponent, q: Exponent) -> Result<f64> {
        Ok(self.copies as f64 * weighted_entropy_sum(&self.factor, p, q)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViolatorReport {
    pub witness: ProductFunction,
    /// Weighted entropy sum of the witness.
    pub value: f64,
    pub target: f64,
}

/// Largest tensor power tried by [`weighted_up_violator`].
pub const MAX_COPIES: usize = 1 << 16;

/// Unit-norm factor on `Z/2` whose tensor powers make up the violator
/// family: `sqrt(2) delta_0` (compact, mass 1; the powers are normalized
/// indicators of the trivial subgroup), or the normalized all-ones function
/// (discrete, unit atoms; the powers are normalized full orbits).
pub fn violator_factor(view: View) -> Result<MeasuredFunction> {
    let spec = GroupSpec::new(vec![2], view, 1.0)?;
    let values = match view {
        View::Compact => vec![Complex64::new(2f64.sqrt(), 0.0), Complex64::new(0.0, 0.0)],
        View::Discrete => vec![Complex64::new(0.5f64.sqrt(), 0.0); 2],
    };
    MeasuredFunction::new(spec, Side::Time, values)
}

/// Grows the violator family until its weighted entropy sum drops strictly
/// below `target`. Needs `(1/p, 1/q)` in `U_CN` (compact) or `U_DN`
/// (discrete).
pub fn weighted_up_violator(
    target: f64,
    p: Exponent,
    q: Exponent,
    view: View,
) -> Result<ViolatorReport> {
    let (u, v) = (p.reciprocal(), q.reciprocal());
    if weighted_region(view, u, v) != WeightedRegion::Fails {
        return Err(Error::OutOfRange(format!(
            "({u}, {v}) is outside the region where the weighted inequality fails for the {view} view"
        )));
    }
    if !target.is_finite() {
        return Err(Error::OutOfRange(format!(
            "target must be finite, got {target}"
        )));
    }
    let factor = violator_factor(view)?;
    let mut best = f64::INFINITY;
    for copies in 1..=MAX_COPIES {
        let witness = ProductFunction {
            factor: factor.clone(),
            copies,
        };
        let value = witness.weighted_entropy_sum(p, q)?;
        if value < target {
            return Ok(ViolatorReport {
                witness,
                value,
                target,
            });
        }
        best = best.min(value);
    }
    Err(Error::FamilyExhausted {
        param: MAX_COPIES,
        best,
        target,
    })
}

fn support_mask(values: &[Complex64]) -> Vec<bool> {
    let max = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    values
        .iter()
        .map(|z| z.norm() > SUPPORT_THRESHOLD * max)
        .collect()
}

/// `a(supp psi) * a^(supp psi^)`.
pub fn support_product(psi: &MeasuredFunction) -> Result<f64> {
    if psi.values().iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::ZeroFunction);
    }
    let fh = forward(psi)?;
    let nt = support_mask(psi.values()).iter().filter(|&&b| b).count();
    let nw = support_mask(fh.values()).iter().filter(|&&b| b).count();
    Ok(nt as f64 * psi.atom() * nw as f64 * fh.atom())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SupportCounts {
    pub n_t: usize,
    pub n_w: usize,
    pub product: usize,
}

/// Support sizes of `psi` and `psi^` under the self-dual normalization
/// (atoms `1/sqrt N` on both sides); `n_t * n_w >= N`.
pub fn donoho_stark_check(psi: &MeasuredFunction) -> Result<SupportCounts> {
    if psi.values().iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::ZeroFunction);
    }
    let n = psi.spec().size();
    let spec = psi
        .spec()
        .with_normalization(View::Compact, (n as f64).sqrt())?;
    let psi = psi.with_spec(spec)?;
    let fh = forward(&psi)?;
    let n_t = support_mask(psi.values()).iter().filter(|&&b| b).count();
    let n_w = support_mask(fh.values()).iter().filter(|&&b| b).count();
    Ok(SupportCounts {
        n_t,
        n_w,
        product: n_t * n_w,
    })
}

/// Rescales `psi` to unit `L^2` norm.
pub fn normalize_l2(psi: &MeasuredFunction) -> Result<MeasuredFunction> {
    let n = psi.l2_norm();
    if n == 0.0 {
        return Err(Error::ZeroFunction);
    }
    Ok(psi.scaled(Complex64::new(1.0 / n, 0.0)))
}
