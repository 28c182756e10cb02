//! Numerical lower bounds for `C_{p,q} = sup ||f^||_q / ||f||_p`.
//!
//! Two sources of candidates are combined:
//!
//! * [`structured_search`] evaluates a fixed library: characters, point
//!   masses, subgroup indicators, the chirp on `(Z/r)^{2n}`, and the constant.
//! * [`ascent_estimate`] runs gradient ascent on the smoothed log-ratio
//!   `J(f) = (1/q) log sum |f^|_e^q w^ - (1/p) log sum |f|_e^p w`, where
//!   `|z|_e = (|z|^2 + e^2)^{1/2}`. `J` is invariant under scaling, so each
//!   iterate is simply rescaled to unit sup norm.
//!
//! Every reported value is recomputed, unsmoothed, from the stored witness,
//! so it is always a genuine lower bound for `C_{p,q}`.

use std::collections::HashSet;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::{forward, kernel_negative, kernel_positive, MeasuredFunction, Side};
use crate::group::{Character, GroupElement, GroupSpec, Subgroup};
use crate::norms::{lp_norm, Exponent};
use crate::region::{closed_form_cpq, Cpq};
use crate::witness::chirp_function;

/// Exponent used in place of `inf` inside the smoothed objective.
pub const SURROGATE_EXPONENT: f64 = 64.0;

/// Groups above this size get one representative character and one point
/// mass in the structured library (all characters share one ratio, as do
/// all point masses).
pub const FULL_LIBRARY_SIZE: usize = 256;

/// Stop adding subgroup joins once this many subgroups are known.
pub const SUBGROUP_CAP: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_shrink: f64,
    pub rel_tol: f64,
    pub smoothing_eps: f64,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 5000,
            step_shrink: 0.5,
            rel_tol: 1e-10,
            smoothing_eps: 1e-12,
            seed: 0,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::OutOfRange(
                "restarts and max_iters must be positive".into(),
            ));
        }
        if !(self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return Err(Error::OutOfRange(format!(
                "step_shrink must lie in (0, 1), got {}",
                self.step_shrink
            )));
        }
        if !(self.rel_tol > 0.0 && self.smoothing_eps > 0.0) {
            return Err(Error::OutOfRange(
                "rel_tol and smoothing_eps must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub witness: MeasuredFunction,
    pub iterations: usize,
    pub converged: bool,
}

/// `||f^||_q / ||f||_p`, unsmoothed.
pub fn norm_ratio(f: &MeasuredFunction, p: Exponent, q: Exponent) -> Result<f64> {
    let nf = lp_norm(f, p);
    if nf == 0.0 {
        return Err(Error::ZeroFunction);
    }
    Ok(lp_norm(&forward(f)?, q) / nf)
}

fn effective(e: Exponent) -> f64 {
    if e.is_infinite() {
        SURROGATE_EXPONENT
    } else {
        e.p()
    }
}

/// `log sum_i |z_i|_e^r w` together with its gradient with respect to
/// `(Re z_i, Im z_i)`, packed as a complex vector.
fn log_power_sum(values: &[Complex64], atom: f64, r: f64, eps: f64) -> (f64, Vec<Complex64>) {
    let eps2 = eps * eps;
    let s2: Vec<f64> = values.iter().map(|z| z.norm_sqr() + eps2).collect();
    let max2 = s2.iter().cloned().fold(0.0, f64::max);
    let t: Vec<f64> = s2.iter().map(|&x| (x / max2).powf(r / 2.0)).collect();
    let sum: f64 = t.iter().sum();
    let log = 0.5 * r * max2.ln() + (sum * atom).ln();
    let grad = values
        .iter()
        .zip(&t)
        .zip(&s2)
        .map(|((z, &ti), &si)| z * (r * ti / (sum * si)))
        .collect();
    (log, grad)
}

/// The smoothed log-ratio objective and its analytic gradient.
#[derive(Debug, Clone)]
pub struct SmoothedRatio {
    spec: GroupSpec,
    p: f64,
    q: f64,
    eps: f64,
}

impl SmoothedRatio {
    /// Infinite exponents are replaced by [`SURROGATE_EXPONENT`].
    pub fn new(spec: &GroupSpec, p: Exponent, q: Exponent, eps: f64) -> Self {
        Self {
            spec: spec.clone(),
            p: effective(p),
            q: effective(q),
            eps,
        }
    }

    fn transform(&self, f: &[Complex64]) -> Vec<Complex64> {
        kernel_negative(&self.spec, f, self.spec.primal_atom())
    }

    pub fn value(&self, f: &[Complex64]) -> f64 {
        let fh = self.transform(f);
        let (ls, _) = log_power_sum(f, self.spec.primal_atom(), self.p, self.eps);
        let (lt, _) = log_power_sum(&fh, self.spec.dual_atom(), self.q, self.eps);
        lt / self.q - ls / self.p
    }

    /// Gradient with respect to `(Re f, Im f)`, packed as `d/dRe + i d/dIm`.
    pub fn value_and_gradient(&self, f: &[Complex64]) -> (f64, Vec<Complex64>) {
        let fh = self.transform(f);
        let (ls, gs) = log_power_sum(f, self.spec.primal_atom(), self.p, self.eps);
        let (lt, gt) = log_power_sum(&fh, self.spec.dual_atom(), self.q, self.eps);
        // The adjoint of f -> f^ is the positive kernel with the same weight.
        let back = kernel_positive(&self.spec, &gt, self.spec.primal_atom());
        let grad = back
            .iter()
            .zip(&gs)
            .map(|(b, s)| b / self.q - s / self.p)
            .collect();
        (lt / self.q - ls / self.p, grad)
    }
}

fn sup_normalize(f: &mut [Complex64]) {
    let m = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if m > 0.0 {
        for z in f.iter_mut() {
            *z /= m;
        }
    }
}

struct Ascent {
    f: Vec<Complex64>,
    iterations: usize,
    converged: bool,
}

fn ascend(obj: &SmoothedRatio, mut f: Vec<Complex64>, cfg: &EstimatorConfig) -> Ascent {
    const ARMIJO: f64 = 1e-4;
    const MIN_STEP: f64 = 1e-30;
    sup_normalize(&mut f);
    let (mut j, mut g) = obj.value_and_gradient(&f);
    let mut step: f64 = 1.0;
    for it in 0..cfg.max_iters {
        let g2: f64 = g.iter().map(|z| z.norm_sqr()).sum();
        if g2 == 0.0 || !g2.is_finite() {
            return Ascent {
                f,
                iterations: it,
                converged: g2 == 0.0,
            };
        }
        let mut a = (2.0 * step).min(1e6);
        let candidate = loop {
            let cand: Vec<Complex64> = f.iter().zip(&g).map(|(x, d)| x + d * a).collect();
            let jc = obj.value(&cand);
            if jc >= j + ARMIJO * a * g2 {
                break Some(cand);
            }
            a *= cfg.step_shrink;
            if a < MIN_STEP {
                break None;
            }
        };
        let Some(mut next) = candidate else {
            return Ascent {
                f,
                iterations: it + 1,
                converged: true,
            };
        };
        sup_normalize(&mut next);
        let (jn, gn) = obj.value_and_gradient(&next);
        let done = (jn - j).abs() <= cfg.rel_tol * j.abs().max(1.0);
        f = next;
        j = jn;
        g = gn;
        step = a;
        if done {
            return Ascent {
                f,
                iterations: it + 1,
                converged: true,
            };
        }
    }
    Ascent {
        f,
        iterations: cfg.max_iters,
        converged: false,
    }
}

fn start_point(spec: &GroupSpec, restart: usize, seed: u64) -> Vec<Complex64> {
    let n = spec.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let mut gauss = || -> Complex64 {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    };
    if restart < n {
        let chi = spec.residues_at(restart);
        let f = MeasuredFunction::character(spec, &Character(chi)).expect("valid character");
        f.values().iter().map(|z| z + gauss() * 1e-3).collect()
    } else if restart < 2 * n {
        let mut f = vec![Complex64::new(0.0, 0.0); n];
        f[restart - n] = Complex64::new(1.0, 0.0);
        f.iter().map(|z| z + gauss() * 1e-3).collect()
    } else {
        (0..n).map(|_| gauss()).collect()
    }
}

/// Multi-start gradient ascent. Restarts begin at (slightly perturbed)
/// characters, then point masses, then complex Gaussian noise, and run in
/// parallel; the best restart wins, ties going to the lowest index.
pub fn ascent_estimate(
    spec: &GroupSpec,
    p: Exponent,
    q: Exponent,
    cfg: &EstimatorConfig,
) -> Result<NormEstimate> {
    cfg.validate()?;
    spec.check_capacity()?;
    let obj = SmoothedRatio::new(spec, p, q, cfg.smoothing_eps);
    let runs: Vec<Result<(f64, Ascent)>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let run = ascend(&obj, start_point(spec, r, cfg.seed), cfg);
            let f = MeasuredFunction::new(spec.clone(), Side::Time, run.f.clone())?;
            Ok((norm_ratio(&f, p, q)?, run))
        })
        .collect();
    let mut best: Option<(f64, Ascent)> = None;
    for run in runs {
        let (value, run) = run?;
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, run));
        }
    }
    let (value, run) = best.expect("at least one restart");
    Ok(NormEstimate {
        value,
        witness: MeasuredFunction::new(spec.clone(), Side::Time, run.f)?,
        iterations: run.iterations,
        converged: run.converged,
    })
}

/// Every subgroup generated by one element, then joins of pairs until no new
/// subgroup appears or [`SUBGROUP_CAP`] is reached.
pub fn enumerate_subgroups(spec: &GroupSpec) -> Result<Vec<Subgroup>> {
    let n = spec.check_capacity()?;
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out: Vec<Subgroup> = Vec::new();
    for i in 0..n {
        let h = spec.subgroup_from_generators(&[GroupElement(spec.residues_at(i))])?;
        if seen.insert(h.indices().to_vec()) {
            out.push(h);
        }
        if out.len() >= SUBGROUP_CAP {
            return Ok(out);
        }
    }
    let mut i = 0;
    while i < out.len() {
        for j in 0..i {
            let gens: Vec<GroupElement> = out[i]
                .generators()
                .iter()
                .chain(out[j].generators())
                .cloned()
                .collect();
            let h = spec.subgroup_from_generators(&gens)?;
            if seen.insert(h.indices().to_vec()) {
                out.push(h);
                if out.len() >= SUBGROUP_CAP {
                    return Ok(out);
                }
            }
        }
        i += 1;
    }
    Ok(out)
}

/// The structured candidate library, in evaluation order.
pub fn structured_candidates(spec: &GroupSpec) -> Result<Vec<MeasuredFunction>> {
    let n = spec.check_capacity()?;
    let reps = if n <= FULL_LIBRARY_SIZE { n } else { 1 };
    let mut out = Vec::new();
    for i in 0..reps {
        out.push(MeasuredFunction::character(
            spec,
            &Character(spec.residues_at(i)),
        )?);
    }
    for i in 0..reps {
        out.push(MeasuredFunction::delta(
            spec,
            Side::Time,
            &spec.residues_at(i),
        )?);
    }
    for h in enumerate_subgroups(spec)? {
        let mut f = MeasuredFunction::zeros(spec, Side::Time)?;
        let height = 1.0 / (h.size() as f64 * spec.primal_atom());
        for &i in h.indices() {
            f.values_mut()[i] = Complex64::new(height, 0.0);
        }
        out.push(f);
    }
    let orders = spec.orders();
    if orders.len().is_multiple_of(2) && orders.iter().all(|&m| m == orders[0]) {
        out.push(chirp_function(spec, orders[0], orders.len() / 2)?);
    }
    out.push(MeasuredFunction::constant(
        spec,
        Side::Time,
        Complex64::new(1.0, 0.0),
    )?);
    Ok(out)
}

/// Best ratio over [`structured_candidates`], ties to the earliest.
pub fn structured_search(spec: &GroupSpec, p: Exponent, q: Exponent) -> Result<NormEstimate> {
    let candidates = structured_candidates(spec)?;
    let values: Vec<f64> = candidates
        .par_iter()
        .map(|f| norm_ratio(f, p, q))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    Ok(NormEstimate {
        value: values[best],
        witness: candidates.into_iter().nth(best).expect("index in range"),
        iterations: 0,
        converged: true,
    })
}

/// The larger of [`structured_search`] and [`ascent_estimate`]. Iteration
/// count and convergence flag always come from the ascent.
pub fn estimate(
    spec: &GroupSpec,
    p: Exponent,
    q: Exponent,
    cfg: &EstimatorConfig,
) -> Result<NormEstimate> {
    let s = structured_search(spec, p, q)?;
    let a = ascent_estimate(spec, p, q, cfg)?;
    Ok(if s.value >= a.value {
        NormEstimate {
            iterations: a.iterations,
            converged: a.converged,
            ..s
        }
    } else {
        a
    })
}

/// Estimate together with the closed form, when one exists.
pub fn estimate_with_closed_form(
    spec: &GroupSpec,
    p: Exponent,
    q: Exponent,
    cfg: &EstimatorConfig,
) -> Result<(NormEstimate, Cpq)> {
    Ok((estimate(spec, p, q, cfg)?, closed_form_cpq(spec, p, q)))
}

/// Largest interpolation defect `log K(b) - ((1 - t) log K(a) + t log K(c))`
/// over consecutive triples `a, b, c` along the segment, with `t` the relative
/// position of `b` between `a` and `c` (`1/2` for equally spaced points).
/// Points are `(u, v, log K)`, must number at least three and lie on one line
/// in the `(u, v)` plane; they may be given in any order.
pub fn log_convexity_check(points: &[(f64, f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::Degenerate(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|&(u, v, k)| !(u.is_finite() && v.is_finite() && k.is_finite()))
    {
        return Err(Error::Degenerate("points must be finite".into()));
    }
    let (u0, v0, _) = points[0];
    let far = points
        .iter()
        .map(|&(u, v, _)| (u - u0, v - v0))
        .max_by(|a, b| (a.0.hypot(a.1)).total_cmp(&b.0.hypot(b.1)))
        .expect("nonempty");
    let len = far.0.hypot(far.1);
    if len == 0.0 {
        return Ok(0.0);
    }
    let dir = (far.0 / len, far.1 / len);
    let scale = points
        .iter()
        .map(|&(u, v, _)| u.abs().max(v.abs()))
        .fold(1.0, f64::max);
    let mut along: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &(u, v, k) in points {
        let (du, dv) = (u - u0, v - v0);
        if (du * dir.1 - dv * dir.0).abs() > 1e-12 * scale {
            return Err(Error::NonCollinear);
        }
        along.push((du * dir.0 + dv * dir.1, k));
    }
    along.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut worst = f64::NEG_INFINITY;
    for w in along.windows(3) {
        let (ta, ka) = w[0];
        let (tb, kb) = w[1];
        let (tc, kc) = w[2];
        let d = if tc == ta {
            0.0
        } else {
            let t = (tb - ta) / (tc - ta);
            kb - ((1.0 - t) * ka + t * kc)
        };
        worst = worst.max(d);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::View;
    use rand::Rng;

    fn e(p: f64) -> Exponent {
        Exponent::from_p(p).unwrap()
    }

    fn quick() -> EstimatorConfig {
        EstimatorConfig {
            restarts: 8,
            max_iters: 400,
            ..Default::default()
        }
    }

    #[test]
    fn structured_hits_closed_forms() {
        let g = GroupSpec::compact(&[6]).unwrap();
        let s = structured_search(&g, e(4.0), e(3.0)).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        let g = GroupSpec::new(vec![4], View::Discrete, 0.25).unwrap();
        let s = structured_search(&g, e(1.0), e(1.0)).unwrap();
        assert!((s.value - 4.0).abs() < 1e-12);
        assert_eq!(
            s.witness.values().iter().filter(|z| z.norm() > 0.0).count(),
            1
        );
        let g = GroupSpec::compact(&[2, 3]).unwrap();
        let s = structured_search(&g, e(2.0), e(2.0)).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subgroup_enumeration() {
        // Z/2 x Z/2 has five subgroups; Z/12 has one per divisor.
        let g = GroupSpec::compact(&[2, 2]).unwrap();
        assert_eq!(enumerate_subgroups(&g).unwrap().len(), 5);
        let g = GroupSpec::compact(&[12]).unwrap();
        assert_eq!(enumerate_subgroups(&g).unwrap().len(), 6);
        let g = GroupSpec::compact(&[2, 2, 2]).unwrap();
        assert_eq!(enumerate_subgroups(&g).unwrap().len(), 16);
    }

    #[test]
    fn ascent_small_cases() {
        let g = GroupSpec::compact(&[2]).unwrap();
        let a = ascent_estimate(&g, e(2.0), e(2.0), &quick()).unwrap();
        assert!((a.value - 1.0).abs() < 1e-9);
        let g = GroupSpec::discrete(&[3]).unwrap();
        let a = ascent_estimate(&g, e(1.0), e(1.0), &quick()).unwrap();
        assert!((a.value - 1.0).abs() < 1e-6, "{}", a.value);
        assert!(a.value <= 1.0 + 1e-9);
    }

    #[test]
    fn estimates_are_achieved_by_witnesses_and_deterministic() {
        let g = GroupSpec::new(vec![5], View::Compact, 2.0).unwrap();
        let cfg = quick();
        let a = ascent_estimate(&g, e(1.5), e(0.8), &cfg).unwrap();
        let again = norm_ratio(&a.witness, e(1.5), e(0.8)).unwrap();
        assert!((a.value - again).abs() <= 1e-12 * a.value);
        let b = ascent_estimate(&g, e(1.5), e(0.8), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (orders, view, p, q) in [
            (vec![5], View::Compact, 3.0, 1.5),
            (vec![2, 3], View::Discrete, 0.7, 4.0),
            (vec![4], View::Compact, f64::INFINITY, 2.0),
        ] {
            let g = GroupSpec::new(orders, view, 1.3).unwrap();
            let obj = SmoothedRatio::new(&g, e(p), e(q), 1e-12);
            let f: Vec<Complex64> = (0..g.size())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let (_, grad) = obj.value_and_gradient(&f);
            let h = 1e-6;
            for i in 0..g.size() {
                for (dir, got) in [
                    (Complex64::new(1.0, 0.0), grad[i].re),
                    (Complex64::new(0.0, 1.0), grad[i].im),
                ] {
                    let mut fp = f.clone();
                    let mut fm = f.clone();
                    fp[i] += dir * h;
                    fm[i] -= dir * h;
                    let fd = (obj.value(&fp) - obj.value(&fm)) / (2.0 * h);
                    assert!(
                        (fd - got).abs() <= 1e-4 * fd.abs().max(1e-3),
                        "{fd} vs {got}"
                    );
                }
            }
        }
    }

    #[test]
    fn convexity_defects() {
        let pts = [(0.1, 0.2, 0.7), (0.2, 0.2, 0.6), (0.3, 0.2, 0.5)];
        assert!(log_convexity_check(&pts).unwrap().abs() < 1e-15);
        let pts = [(0.0, 0.0, 0.0), (0.5, 0.5, 1.0), (1.0, 1.0, 0.0)];
        assert_eq!(log_convexity_check(&pts).unwrap(), 1.0);
        let pts = [(0.0, 0.0, 0.0), (0.25, 0.25, 0.0), (1.0, 1.0, 1.0)];
        assert!((log_convexity_check(&pts).unwrap() + 0.25).abs() < 1e-15);
        let pts = [(0.3, 0.3, 1.0); 3];
        assert_eq!(log_convexity_check(&pts).unwrap(), 0.0);
        let pts = [(0.0, 0.0, 0.0), (0.5, 0.1, 0.0), (1.0, 1.0, 0.0)];
        assert_eq!(log_convexity_check(&pts), Err(Error::NonCollinear));
        assert!(log_convexity_check(&pts[..2]).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = EstimatorConfig {
            step_shrink: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(EstimatorConfig::default().validate().is_ok());
    }
}
