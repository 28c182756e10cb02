//! A fast subset of the acceptance checks, run from a fixed seed.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::estimator::{estimate, log_convexity_check, EstimatorConfig};
use crate::fourier::{double_transform, forward, inverse, MeasuredFunction, Side};
use crate::group::{Character, GroupSpec, View};
use crate::norms::{lp_norm, Exponent};
use crate::region::closed_form_cpq;
use crate::uncertainty::{
    donoho_stark_check, normalize_l2, support_product, weighted_up_margin, weighted_up_violator,
};
use crate::witness::{
    arc_indicator_witness, chirp_witness, clt_delta_witness, full_orbit_witness,
    subgroup_indicator_witness,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn ur(u: f64) -> Exponent {
    Exponent::from_reciprocal(u).expect("nonnegative")
}

fn random_function(rng: &mut ChaCha8Rng, max_size: usize) -> Result<MeasuredFunction> {
    let spec = loop {
        let rank = rng.random_range(1..=3);
        let orders: Vec<usize> = (0..rank).map(|_| rng.random_range(2..=12)).collect();
        if orders.iter().product::<usize>() <= max_size {
            let view = if rng.random_bool(0.5) {
                View::Compact
            } else {
                View::Discrete
            };
            break GroupSpec::new(orders, view, rng.random_range(0.2..5.0))?;
        }
    };
    let mut f = MeasuredFunction::from_fn(&spec, Side::Time, |_| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })?;
    if f.l2_norm() == 0.0 {
        f.values_mut()[0] = Complex64::new(1.0, 0.0);
    }
    Ok(f)
}

fn ratio(f: &MeasuredFunction, p: Exponent, q: Exponent) -> Result<f64> {
    Ok(lp_norm(&forward(f)?, q) / lp_norm(f, p))
}

fn transforms(rng: &mut ChaCha8Rng) -> Result<SelfCheck> {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let f = random_function(rng, 512)?;
        let fh = forward(&f)?;
        let n2 = f.l2_norm();
        worst = worst.max((n2 - fh.l2_norm()).abs() / n2);
        worst = worst.max(inverse(&fh)?.max_abs_diff(&f));
        worst = worst.max(double_transform(&f)?.max_abs_diff(&f.reflected()));
    }
    Ok(SelfCheck {
        name: "parseval_inversion_reflection",
        passed: worst <= 1e-10,
        detail: format!("max defect {worst:.2e}"),
    })
}

fn closed_forms() -> Result<SelfCheck> {
    let mut worst = 0.0f64;
    for (orders, mass) in [(vec![7], 3.0), (vec![4, 4], 0.5), (vec![2, 3], 1.0)] {
        let gc = GroupSpec::new(orders.clone(), View::Compact, mass)?;
        let gd = GroupSpec::new(orders, View::Discrete, mass)?;
        let chi = MeasuredFunction::character(&gc, &Character(gc.residues_at(1)))?;
        let d = MeasuredFunction::delta(&gd, Side::Time, &gd.residues_at(1))?;
        for (u, v) in [(0.0, 0.0), (0.5, 0.5), (0.25, 0.25), (1.0, 0.0)] {
            let c = closed_form_cpq(&gc, ur(u), ur(v))
                .finite()
                .unwrap_or(f64::NAN);
            worst = worst.max((ratio(&chi, ur(u), ur(v))? - c).abs() / c);
        }
        for (u, v) in [(0.5, 0.5), (1.0, 1.0), (0.75, 0.25), (2.0, 0.0)] {
            let c = closed_form_cpq(&gd, ur(u), ur(v))
                .finite()
                .unwrap_or(f64::NAN);
            worst = worst.max((ratio(&d, ur(u), ur(v))? - c).abs() / c);
        }
    }
    Ok(SelfCheck {
        name: "closed_form_attainment",
        passed: worst <= 1e-12,
        detail: format!("max relative error {worst:.2e}"),
    })
}

fn estimator(seed: u64) -> Result<SelfCheck> {
    let cfg = EstimatorConfig {
        restarts: 8,
        max_iters: 500,
        seed,
        ..Default::default()
    };
    let mut gap = 0.0f64;
    let mut pts = Vec::new();
    for (view, u, v) in [(View::Compact, 0.5, 0.25), (View::Discrete, 1.0, 0.5)] {
        let g = GroupSpec::new(vec![4], view, 1.0)?;
        let est = estimate(&g, ur(u), ur(v), &cfg)?;
        let c = closed_form_cpq(&g, ur(u), ur(v))
            .finite()
            .unwrap_or(f64::NAN);
        gap = gap.max((est.value - c).abs());
    }
    let g = GroupSpec::new(vec![4], View::Compact, 1.0)?;
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        pts.push((t, 0.25, estimate(&g, ur(t), ur(0.25), &cfg)?.value.ln()));
    }
    let defect = log_convexity_check(&pts)?;
    Ok(SelfCheck {
        name: "estimator_and_convexity",
        passed: gap <= 1e-6 && defect <= 1e-6,
        detail: format!("closed-form gap {gap:.2e}, convexity defect {defect:.2e}"),
    })
}

fn witnesses() -> Result<SelfCheck> {
    let one = ur(1.0);
    let mut ok = true;
    let mut worst = 0.0f64;
    for w in [
        subgroup_indicator_witness(2, 10, one, one)?,
        subgroup_indicator_witness(3, 5, ur(0.5), ur(1.5))?,
        full_orbit_witness(100, ur(0.0), ur(0.0))?,
        chirp_witness(3, 2, one)?,
    ] {
        let pred = w.prediction.unwrap_or(f64::NAN);
        worst = worst.max((w.ratio - pred).abs() / pred);
    }
    for k in [4, 8] {
        ok &= arc_indicator_witness(k, 200 * k, one, one)?.ratio >= 0.5 * k as f64 * (1.0 - 1e-9);
    }
    let clt = clt_delta_witness(2, 12, ur(1.0 / 3.0), one)?;
    ok &= clt.tail_probability >= 0.05;
    Ok(SelfCheck {
        name: "witness_families",
        passed: ok && worst <= 1e-12,
        detail: format!(
            "max exact-ratio error {worst:.2e}, arc bounds held: {ok}, tail {:.4}",
            clt.tail_probability
        ),
    })
}

fn uncertainty(rng: &mut ChaCha8Rng) -> Result<SelfCheck> {
    let mut margin = f64::INFINITY;
    let mut supports = true;
    for _ in 0..100 {
        let f = random_function(rng, 64)?;
        let psi = normalize_l2(&f)?;
        let (u, v) = match psi.spec().view() {
            View::Compact => (0.75, 0.2),
            View::Discrete => (1.0, 0.3),
        };
        margin = margin.min(weighted_up_margin(&psi, ur(u), ur(v))?.margin);
        supports &= support_product(&f)? >= 1.0 - 1e-12;
        supports &= donoho_stark_check(&f)?.product >= f.spec().size();
    }
    let v = weighted_up_violator(-10.0, ur(0.9), ur(0.4), View::Compact)?;
    Ok(SelfCheck {
        name: "uncertainty_principles",
        passed: margin >= -1e-9 && supports && v.value <= -10.0,
        detail: format!(
            "min weighted margin {margin:.2e}, support bounds held: {supports}, violator {:.3}",
            v.value
        ),
    })
}

/// Runs every check; errors inside a check are reported as failures.
pub fn run(seed: u64) -> Vec<SelfCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wrap = |name: &'static str, r: Result<SelfCheck>| {
        r.unwrap_or_else(|e| SelfCheck {
            name,
            passed: false,
            detail: e.to_string(),
        })
    };
    vec![
        wrap("parseval_inversion_reflection", transforms(&mut rng)),
        wrap("closed_form_attainment", closed_forms()),
        wrap("estimator_and_convexity", estimator(seed)),
        wrap("witness_families", witnesses()),
        wrap("uncertainty_principles", uncertainty(&mut rng)),
    ]
}
