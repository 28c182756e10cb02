//! End-to-end acceptance checks. Prints one `PASS`/`FAIL` line per criterion
//! and exits nonzero if any fails.

use std::time::{Duration, Instant};

use lcanorm_core::estimator::{estimate, log_convexity_check, EstimatorConfig};
use lcanorm_core::fourier::{double_transform, forward, inverse};
use lcanorm_core::uncertainty::{
    donoho_stark_check, normalize_l2, support_product, unweighted_up_margin, weighted_up_margin,
    weighted_up_violator,
};
use lcanorm_core::witness::{
    arc_indicator_witness, chirp_witness, clt_delta_witness, fit_growth, full_orbit_witness,
    lacunary_coefficient_norm, lacunary_compact_witness, lacunary_discrete_witness,
    subgroup_indicator_witness,
};
use lcanorm_core::{
    closed_form_cpq, lp_norm, Character, Exponent, GroupSpec, MeasuredFunction, Side, View,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);
type Segment = Box<dyn Fn(f64) -> (f64, f64)>;

fn e(p: f64) -> Exponent {
    Exponent::from_p(p).unwrap()
}

fn ur(u: f64) -> Exponent {
    Exponent::from_reciprocal(u).unwrap()
}

fn random_group(rng: &mut ChaCha8Rng, max_size: usize) -> GroupSpec {
    loop {
        let rank = rng.random_range(1..=4);
        let orders: Vec<usize> = (0..rank).map(|_| rng.random_range(2..=24)).collect();
        if orders.iter().product::<usize>() > max_size {
            continue;
        }
        let view = if rng.random_bool(0.5) {
            View::Compact
        } else {
            View::Discrete
        };
        let mass = 10f64.powf(rng.random_range(-1.0..1.0));
        return GroupSpec::new(orders, view, mass).unwrap();
    }
}

fn random_function(rng: &mut ChaCha8Rng, spec: &GroupSpec) -> MeasuredFunction {
    let sparse = rng.random_bool(0.3);
    let mut f = MeasuredFunction::from_fn(spec, Side::Time, |_| {
        if sparse && rng.random_bool(0.7) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }
    })
    .unwrap();
    if f.values().iter().all(|z| z.norm() == 0.0) {
        let i = rng.random_range(0..spec.size());
        f.values_mut()[i] = Complex64::new(1.0, 0.0);
    }
    f
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Independent reflection: entry at `x` moves to `-x`, computed from residues.
fn reflect_oracle(f: &MeasuredFunction) -> Vec<Complex64> {
    let spec = f.spec();
    (0..spec.size())
        .map(|i| {
            let neg: Vec<usize> = spec
                .residues_at(i)
                .iter()
                .zip(spec.orders())
                .map(|(&x, &m)| (m - x) % m)
                .collect();
            f.values()[spec.index_of(&neg).unwrap()]
        })
        .collect()
}

fn ac1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut pars, mut inv, mut dbl) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let g = random_group(&mut rng, 4096);
        let f = random_function(&mut rng, &g);
        let fh = forward(&f).unwrap();
        let n2 = f.l2_norm();
        if n2 > 0.0 {
            pars = pars.max((n2 - fh.l2_norm()).abs() / n2);
        }
        let scale = f.values().iter().map(|z| z.norm()).fold(1.0, f64::max);
        inv = inv.max(inverse(&fh).unwrap().max_abs_diff(&f) / scale);
        let d = double_transform(&f).unwrap();
        let oracle = reflect_oracle(&f);
        let diff = d
            .values()
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        dbl = dbl.max(diff / scale);
    }
    check(
        pars <= 1e-10 && inv <= 1e-10 && dbl <= 1e-10,
        format!("parseval {pars:.2e}, inversion {inv:.2e}, reflection {dbl:.2e}"),
    )
}

const R1_GRID: [(f64, f64); 12] = [
    (0.0, 0.0),
    (0.25, 0.0),
    (0.5, 0.0),
    (0.75, 0.0),
    (1.0, 0.0),
    (0.0, 0.25),
    (0.25, 0.25),
    (0.5, 0.25),
    (0.75, 0.25),
    (0.0, 0.5),
    (0.25, 0.5),
    (0.5, 0.5),
];

const R2P_GRID: [(f64, f64); 12] = [
    (0.5, 0.5),
    (0.5, 0.75),
    (0.5, 1.0),
    (0.75, 0.25),
    (0.75, 0.5),
    (0.75, 1.0),
    (1.0, 0.0),
    (1.0, 0.5),
    (1.0, 1.0),
    (1.5, 0.5),
    (2.0, 0.0),
    (2.0, 2.0),
];

/// `a(X)^{1-u-v}` (compact) or `a^(X^)^{u+v-1}` (discrete), from the mass.
fn formula(spec: &GroupSpec, u: f64, v: f64) -> f64 {
    match spec.view() {
        View::Compact => spec.mass().powf(1.0 - u - v),
        View::Discrete => (1.0 / spec.mass()).powf(u + v - 1.0),
    }
}

fn ratio(f: &MeasuredFunction, p: Exponent, q: Exponent) -> f64 {
    lp_norm(&forward(f).unwrap(), q) / lp_norm(f, p)
}

fn ac2() -> Outcome {
    let groups = [
        (vec![7], 3.0),
        (vec![4, 4], 0.5),
        (vec![2, 2, 2, 2, 2, 2], 1.0),
        (vec![3, 5], 2.0),
        (vec![8, 8], 0.2),
    ];
    let mut worst = 0.0f64;
    for (orders, mass) in groups {
        let gc = GroupSpec::new(orders.clone(), View::Compact, mass).unwrap();
        let gd = GroupSpec::new(orders, View::Discrete, mass).unwrap();
        for &(u, v) in &R1_GRID {
            let want = formula(&gc, u, v);
            for i in [0, gc.size() / 2, gc.size() - 1] {
                let chi = MeasuredFunction::character(&gc, &Character(gc.residues_at(i))).unwrap();
                worst = worst.max((ratio(&chi, ur(u), ur(v)) - want).abs() / want);
            }
        }
        for &(u, v) in &R2P_GRID {
            let want = formula(&gd, u, v);
            for i in [0, gd.size() / 3, gd.size() - 1] {
                let d = MeasuredFunction::delta(&gd, Side::Time, &gd.residues_at(i)).unwrap();
                worst = worst.max((ratio(&d, ur(u), ur(v)) - want).abs() / want);
            }
        }
    }
    check(worst <= 1e-12, format!("max relative error {worst:.2e}"))
}

fn ac3() -> Outcome {
    let groups = [
        (vec![2], 1.0),
        (vec![3], 2.0),
        (vec![4], 0.5),
        (vec![2, 2], 1.0),
        (vec![5], 1.5),
        (vec![6], 1.0),
        (vec![2, 3], 0.7),
    ];
    let cfg = EstimatorConfig::default();
    let (mut gap, mut excess) = (0.0f64, f64::NEG_INFINITY);
    for (orders, mass) in groups {
        for (view, grid) in [(View::Compact, &R1_GRID), (View::Discrete, &R2P_GRID)] {
            let g = GroupSpec::new(orders.clone(), view, mass).unwrap();
            for &(u, v) in grid.iter() {
                let want = formula(&g, u, v);
                let est = estimate(&g, ur(u), ur(v), &cfg).unwrap();
                gap = gap.max((est.value - want).abs());
                excess = excess.max(est.value - want);
            }
        }
    }
    check(
        gap <= 1e-6 && excess <= 1e-9,
        format!("max |estimate - closed form| {gap:.2e}, max excess {excess:.2e}"),
    )
}

fn ac4() -> Outcome {
    let mut worst = 0.0f64;
    let mut slope_err = 0.0f64;
    let pqs = [(1.0, 1.0), (0.5, 2.0), (2.0, 2.0), (1.0, 0.75), (4.0, 1.5)];
    for &(p, q) in &pqs {
        let (u, v) = (1.0 / p, 1.0 / q);
        for (r, nmax) in [(2usize, 20usize), (3, 12)] {
            let pts: Vec<_> = (1..=nmax)
                .map(|n| subgroup_indicator_witness(r, n, e(p), e(q)).unwrap())
                .collect();
            for (n, w) in (1..).zip(&pts) {
                let want = (r as f64).powf(n as f64 * (u + v - 1.0));
                worst = worst.max((w.ratio - want).abs() / want);
            }
            let fit = fit_growth(&pts).unwrap();
            slope_err = slope_err.max((fit.slope.abs() - (u + v - 1.0).abs()).abs());
        }
        let ms: Vec<usize> = (1..=10).map(|k| 1 << k).chain([3, 7, 100, 1000]).collect();
        for &m in &ms {
            let w = full_orbit_witness(m, e(p), e(q)).unwrap();
            let want = (m as f64).powf(1.0 - u - v);
            worst = worst.max((w.ratio - want).abs() / want);
        }
        let pts: Vec<_> = (1..=10)
            .map(|k| full_orbit_witness(1 << k, e(p), e(q)).unwrap())
            .collect();
        let fit = fit_growth(&pts).unwrap();
        slope_err = slope_err.max((fit.slope.abs() - (1.0 - u - v).abs()).abs());
        for (r, nmax) in [(2usize, 10usize), (3, 6)] {
            for n in 1..=nmax {
                let w = chirp_witness(r, n, e(q)).unwrap();
                let want = (r as f64).powf(n as f64 * (2.0 - q) / q);
                worst = worst.max((w.ratio - want).abs() / want);
            }
        }
    }
    check(
        worst <= 1e-12 && slope_err <= 1e-6,
        format!("max relative ratio error {worst:.2e}, max slope error {slope_err:.2e}"),
    )
}

fn ac5() -> Outcome {
    let ks = [4usize, 8, 16, 32, 64];
    let pts: Vec<_> = ks
        .iter()
        .map(|&k| arc_indicator_witness(k, 200 * k, e(1.0), e(1.0)).unwrap())
        .collect();
    let ok_bound = ks
        .iter()
        .zip(&pts)
        .all(|(&k, w)| w.ratio >= 0.5 * k as f64 * (1.0 - 1e-9));
    let slope = fit_growth(&pts).unwrap().slope;
    let ratios: Vec<String> = pts.iter().map(|w| format!("{:.3}", w.ratio)).collect();
    check(
        ok_bound && (slope - 1.0).abs() <= 0.1,
        format!("ratios [{}], slope {slope:.4}", ratios.join(", ")),
    )
}

fn ac6() -> Outcome {
    let (p, q) = (e(4.0), e(1.0));
    let small = lacunary_compact_witness(64, 1.5, 1.0, p, q).unwrap();
    let large = lacunary_compact_witness(4096, 1.5, 1.0, p, q).unwrap();
    let growth = large.ratio / small.ratio;
    let norm_growth = large.norm_f / small.norm_f;
    let sums_match = [(64, &small), (4096, &large)].iter().all(|(m, w)| {
        let s = lacunary_coefficient_norm(*m, 1.5, 1.0, q).unwrap();
        (w.norm_fhat - s).abs() <= 1e-12 * s
    });
    check(
        growth >= 2.0 && norm_growth <= 1.5 && sums_match,
        format!(
            "ratio {:.5} -> {:.5} (x{growth:.3}), ||f||_4 {:.5} -> {:.5} (x{norm_growth:.3})",
            small.ratio, large.ratio, small.norm_f, large.norm_f
        ),
    )
}

/// `zeta(3/2)` by a partial sum plus an Euler-Maclaurin tail.
fn zeta_three_halves() -> f64 {
    let n = 10_000u64;
    let partial: f64 = (1..n).map(|k| (k as f64).powf(-1.5)).sum();
    let x = n as f64;
    partial + 2.0 / x.sqrt() + 0.5 * x.powf(-1.5) + 0.125 * x.powf(-2.5)
}

fn ac7() -> Vec<(&'static str, Outcome)> {
    let (p, q) = (e(3.0), e(1.0));
    let mut parseval = 0.0f64;
    for n in 1..=16 {
        let rep = lacunary_discrete_witness(n, p, q, 8 << n).unwrap();
        let exact = (1..=n).map(|k| 1.0 / k as f64).sum::<f64>().sqrt();
        parseval = parseval.max((rep.l2_quadrature - exact).abs());
    }
    let ns = [8usize, 10, 12, 14, 16];
    let reps: Vec<_> = ns
        .iter()
        .map(|&n| lacunary_discrete_witness(n, p, q, 8 << n).unwrap())
        .collect();
    let l1: Vec<f64> = reps.iter().map(|r| r.point.norm_fhat).collect();
    let increasing = l1.windows(2).all(|w| w[1] > w[0]);
    let limit = zeta_three_halves().powf(1.0 / 3.0);
    let fractions: Vec<f64> = reps.iter().map(|r| r.point.norm_f / limit).collect();
    let within = fractions.iter().all(|f| (1.0 - f).abs() <= 0.05);
    let fmt = |xs: &[f64]| {
        xs.iter()
            .map(|x| format!("{x:.5}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    vec![
        (
            "7a",
            check(
                parseval <= 1e-6,
                format!("max quadrature Parseval error {parseval:.2e} for n <= 16"),
            ),
        ),
        (
            "7b",
            check(
                increasing,
                format!("||f^_n||_1 over n = 8..16: [{}]", fmt(&l1)),
            ),
        ),
        (
            "7c",
            check(
                within,
                format!(
                    "||f_n||_3 / limit {limit:.5} over n = 8..16: [{}]; needs >= 0.95",
                    fmt(&fractions)
                ),
            ),
        ),
    ]
}

fn ac8() -> Outcome {
    let (p, q) = (e(3.0), e(1.0));
    let rep = clt_delta_witness(2, 16, p, q).unwrap();
    let l1: Vec<f64> = [8, 12, 16]
        .iter()
        .map(|&n| clt_delta_witness(2, n, p, q).unwrap().point.norm_fhat)
        .collect();
    check(
        rep.tail_probability >= 0.05 && l1.windows(2).all(|w| w[1] > w[0]),
        format!(
            "tail {:.5} at n = 16; ||f^||_1 at n = 8, 12, 16: {:.5}, {:.5}, {:.5}",
            rep.tail_probability, l1[0], l1[1], l1[2]
        ),
    )
}

fn ac9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let uc = [
        (0.6, 0.0),
        (0.75, 0.25),
        (1.0, 0.0),
        (0.9, 0.1),
        (0.55, 0.45),
        (0.8, 0.2),
    ];
    let ud = [
        (0.6, 0.45),
        (1.0, 0.0),
        (1.0, 0.4),
        (2.0, 0.25),
        (0.75, 0.3),
        (1.5, 0.0),
    ];
    let mut weighted = f64::INFINITY;
    for _ in 0..1000 {
        let g = random_group(&mut rng, 64);
        let psi = normalize_l2(&random_function(&mut rng, &g)).unwrap();
        let grid = if g.view() == View::Compact { &uc } else { &ud };
        for &(u, v) in grid.iter() {
            weighted = weighted.min(weighted_up_margin(&psi, ur(u), ur(v)).unwrap().margin);
        }
    }
    let mut unweighted = f64::INFINITY;
    for _ in 0..1000 {
        let g = random_group(&mut rng, 64);
        let psi = normalize_l2(&random_function(&mut rng, &g)).unwrap();
        let u = rng.random_range(0.0..2.0);
        let v = rng.random_range((1.0f64 - u).max(0.0)..2.0);
        unweighted = unweighted.min(unweighted_up_margin(&psi, ur(u), ur(v)).unwrap().margin);
    }
    let mut equality = 0.0f64;
    for (orders, mass) in [(vec![4], 1.0), (vec![3, 2], 2.0), (vec![5], 0.3)] {
        let gc = GroupSpec::new(orders.clone(), View::Compact, mass).unwrap();
        let gd = GroupSpec::new(orders, View::Discrete, mass).unwrap();
        let chi =
            normalize_l2(&MeasuredFunction::character(&gc, &Character(gc.residues_at(1))).unwrap())
                .unwrap();
        let d =
            normalize_l2(&MeasuredFunction::delta(&gd, Side::Time, &gd.residues_at(1)).unwrap())
                .unwrap();
        for &(u, v) in &uc {
            equality = equality.max(weighted_up_margin(&chi, ur(u), ur(v)).unwrap().margin.abs());
        }
        for &(u, v) in &ud {
            equality = equality.max(weighted_up_margin(&d, ur(u), ur(v)).unwrap().margin.abs());
        }
        for &(u, v) in &[(0.5, 0.5), (1.0, 1.0), (0.2, 0.9), (0.0, 1.0)] {
            equality = equality.max(
                unweighted_up_margin(&chi, ur(u), ur(v))
                    .unwrap()
                    .margin
                    .abs(),
            );
            equality = equality.max(unweighted_up_margin(&d, ur(u), ur(v)).unwrap().margin.abs());
        }
    }
    let violator = weighted_up_violator(-10.0, ur(0.9), ur(0.4), View::Compact).unwrap();
    check(
        weighted >= -1e-9 && unweighted >= -1e-9 && equality <= 1e-12 && violator.value <= -10.0,
        format!(
            "min weighted margin {weighted:.3e}, min unweighted margin {unweighted:.3e}, \
             max equality-case |margin| {equality:.2e}, violator value {:.4} on (Z/2)^{}",
            violator.value, violator.witness.copies
        ),
    )
}

fn ac10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut min_support = f64::INFINITY;
    let mut ds_ok = true;
    for _ in 0..10_000 {
        let g = random_group(&mut rng, 256);
        let f = random_function(&mut rng, &g);
        min_support = min_support.min(support_product(&f).unwrap());
        let c = donoho_stark_check(&f).unwrap();
        ds_ok &= c.product >= g.size();
    }
    let mut equality = true;
    for orders in [vec![4], vec![2, 3], vec![16], vec![4, 4, 4]] {
        for view in [View::Compact, View::Discrete] {
            let g = GroupSpec::new(orders.clone(), view, 1.0).unwrap();
            let n = g.size();
            for i in [0, n - 1] {
                let chi = MeasuredFunction::character(&g, &Character(g.residues_at(i))).unwrap();
                let d = MeasuredFunction::delta(&g, Side::Time, &g.residues_at(i)).unwrap();
                equality &= support_product(&chi).unwrap() == 1.0;
                equality &= support_product(&d).unwrap() == 1.0;
                let (cc, cd) = (
                    donoho_stark_check(&chi).unwrap(),
                    donoho_stark_check(&d).unwrap(),
                );
                equality &= (cc.n_t, cc.n_w, cd.n_t, cd.n_w) == (n, 1, 1, n);
            }
        }
    }
    check(
        min_support >= 1.0 - 1e-12 && ds_ok && equality,
        format!(
            "min support product {min_support:.6}, Donoho-Stark bound held: {ds_ok}, \
             equality on bases: {equality}"
        ),
    )
}

fn ac11() -> Outcome {
    let cfg = EstimatorConfig::default();
    let ts: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
    let segments: [Segment; 3] = [
        Box::new(|t| (t, 0.25)),
        Box::new(|t| (0.75, t)),
        Box::new(|t| (t, t)),
    ];
    let mut worst = f64::NEG_INFINITY;
    for view in [View::Compact, View::Discrete] {
        let g = GroupSpec::new(vec![4], view, 1.0).unwrap();
        for seg in &segments {
            let pts: Vec<(f64, f64, f64)> = ts
                .iter()
                .map(|&t| {
                    let (u, v) = seg(t);
                    let est = estimate(&g, ur(u), ur(v), &cfg).unwrap();
                    (u, v, est.value.ln())
                })
                .collect();
            worst = worst.max(log_convexity_check(&pts).unwrap());
        }
    }
    let g = GroupSpec::new(vec![6], View::Compact, 3.0).unwrap();
    let closed: Vec<(f64, f64, f64)> = [(0.0, 0.1), (0.2, 0.2), (0.4, 0.3), (0.6, 0.4)]
        .iter()
        .map(|&(u, v)| {
            (
                u,
                v,
                closed_form_cpq(&g, ur(u), ur(v)).finite().unwrap().ln(),
            )
        })
        .collect();
    let closed_defect = log_convexity_check(&closed).unwrap();
    check(
        worst <= 1e-6 && closed_defect.abs() <= 1e-12,
        format!("max estimated defect {worst:.2e}, closed-form defect {closed_defect:.2e}"),
    )
}

fn main() {
    let mut failures = 0;
    let mut report = |name: &str, limit: Duration, elapsed: Duration, outcome: Outcome| {
        let (ok, msg) = match outcome {
            Ok(m) => (elapsed <= limit, m),
            Err(m) => (false, m),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "{} AC{name}: {msg} [{:.2}s, limit {}s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    };
    let secs = Duration::from_secs;
    let single: [Criterion; 6] = [
        ("1", 30, ac1),
        ("2", 10, ac2),
        ("3", 300, ac3),
        ("4", 60, ac4),
        ("5", 60, ac5),
        ("6", 60, ac6),
    ];
    for (name, limit, f) in single {
        let t = Instant::now();
        let out = f();
        report(name, secs(limit), t.elapsed(), out);
    }
    let t = Instant::now();
    let parts = ac7();
    let elapsed = t.elapsed();
    for (name, out) in parts {
        report(name, secs(120), elapsed, out);
    }
    let rest: [Criterion; 4] = [
        ("8", 30, ac8),
        ("9", 120, ac9),
        ("10", 60, ac10),
        ("11", 300, ac11),
    ];
    for (name, limit, f) in rest {
        let t = Instant::now();
        let out = f();
        report(name, secs(limit), t.elapsed(), out);
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
