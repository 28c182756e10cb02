use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lcanorm_core::estimator::{estimate, EstimatorConfig};
use lcanorm_core::fourier::{forward, forward_direct, inverse, inverse_direct};
use lcanorm_core::io::{fmt_f64, read_function_csv, write_function_csv};
use lcanorm_core::region::{classify_spec, classify_with_mass, Cpq};
use lcanorm_core::uncertainty::{
    donoho_stark_check, support_product, unweighted_up_margin, weighted_up_margin,
    weighted_up_violator,
};
use lcanorm_core::witness::{
    arc_indicator_witness, chirp_witness, clt_delta_witness, full_orbit_witness,
    lacunary_compact_witness, lacunary_discrete_witness, subgroup_indicator_witness,
};
use lcanorm_core::{
    closed_form_cpq, lp_norm, Error, Exponent, GroupSpec, MeasuredFunction, View, WitnessPoint,
};
use serde::Serialize;
use serde_json::{json, Value};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAPACITY: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;

/// Fourier operator norms and uncertainty principles on finite abelian groups.
#[derive(Debug, Parser)]
#[command(name = "lcanorm", version)]
struct Cli {
    /// Run the built-in self test and exit.
    #[arg(long)]
    selftest: bool,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sizes and Haar weights of a group.
    Info {
        #[arg(long)]
        group: GroupSpec,
    },
    /// Fourier transform of a function given as CSV.
    Transform {
        /// Input CSV, `-` for stdin.
        #[arg(long, default_value = "-")]
        input: PathBuf,
        /// Output CSV, stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Apply the inverse transform (input must be on the frequency side).
        #[arg(long)]
        inverse: bool,
        /// Use the direct O(N^2) summation instead of the fast path.
        #[arg(long)]
        direct: bool,
    },
    /// L^p quasi-norm of a function given as CSV.
    Norm {
        #[arg(long, default_value = "-")]
        input: PathBuf,
        #[arg(long)]
        p: Exponent,
    },
    /// Region of (1/p, 1/q) and whether C_{p,q} is finite there.
    Region {
        #[arg(long, value_enum)]
        side: ViewArg,
        #[arg(long)]
        u: f64,
        #[arg(long)]
        v: f64,
        /// a(X) for the compact side, a^(X^) for the discrete side.
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
    },
    /// Closed-form C_{p,q} for a group.
    Cpq {
        #[arg(long)]
        group: GroupSpec,
        #[arg(long)]
        p: Exponent,
        #[arg(long)]
        q: Exponent,
    },
    /// One member of a witness family.
    Witness(WitnessArgs),
    /// A family of witnesses or a grid of region verdicts, as CSV.
    Sweep(SweepArgs),
    /// Numerical estimate of C_{p,q}.
    Estimate {
        #[arg(long)]
        group: GroupSpec,
        #[arg(long)]
        p: Exponent,
        #[arg(long)]
        q: Exponent,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 5000)]
        max_iters: usize,
        #[arg(long, default_value_t = 0.5)]
        step_shrink: f64,
        #[arg(long, default_value_t = 1e-10)]
        rel_tol: f64,
        #[arg(long, default_value_t = 1e-12)]
        smoothing_eps: f64,
        /// Also write the best witness as CSV.
        #[arg(long)]
        witness_output: Option<PathBuf>,
    },
    /// Entropic and support uncertainty principles.
    Uncertainty(UncertaintyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ViewArg {
    Compact,
    Discrete,
}

impl From<ViewArg> for View {
    fn from(v: ViewArg) -> Self {
        match v {
            ViewArg::Compact => View::Compact,
            ViewArg::Discrete => View::Discrete,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Arc,
    Subgroup,
    FullOrbit,
    Chirp,
    LacunaryCompact,
    LacunaryDiscrete,
    Clt,
}

#[derive(Debug, Clone, Args)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Prime base for subgroup, chirp and clt.
    #[arg(long, default_value_t = 2)]
    r: usize,
    #[arg(long, default_value = "1")]
    p: Exponent,
    #[arg(long, default_value = "1")]
    q: Exponent,
    /// Group order per unit of k for the arc family (m = factor * k).
    #[arg(long, default_value_t = 200)]
    m_per_k: usize,
    #[arg(long, default_value_t = 1.5)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Quadrature points per unit of 2^n for lacunary-discrete.
    #[arg(long, default_value_t = 8)]
    grid_factor: usize,
}

#[derive(Debug, Clone, Args)]
struct WitnessArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Family parameter: n for subgroup, chirp, lacunary-discrete, clt.
    #[arg(long)]
    n: Option<usize>,
    /// Family parameter: m for full-orbit and lacunary-compact; overrides
    /// m-per-k for arc.
    #[arg(long)]
    m: Option<usize>,
    /// Family parameter: k for arc.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepKind {
    Witness,
    Region,
}

#[derive(Debug, Clone, Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    kind: SweepKind,
    /// Worker threads; the output does not depend on it.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    family: Option<Family>,
    /// Comma-separated family parameters (n, m or k depending on the family).
    #[arg(long, value_delimiter = ',')]
    values: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    r: usize,
    #[arg(long, default_value = "1")]
    p: Exponent,
    #[arg(long, default_value = "1")]
    q: Exponent,
    #[arg(long, default_value_t = 200)]
    m_per_k: usize,
    #[arg(long, default_value_t = 1.5)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 8)]
    grid_factor: usize,
    /// Region grid: sides to classify.
    #[arg(long, value_enum)]
    side: Option<ViewArg>,
    /// Region grid: u and v both run over [0, max].
    #[arg(long, default_value_t = 2.0)]
    max: f64,
    /// Region grid: intervals per axis.
    #[arg(long, default_value_t = 8)]
    steps: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UncertaintyMode {
    Check,
    Violate,
    Support,
}

#[derive(Debug, Clone, Args)]
struct UncertaintyArgs {
    #[arg(long, value_enum)]
    mode: UncertaintyMode,
    /// Function CSV for check and support, `-` for stdin.
    #[arg(long, default_value = "-")]
    input: PathBuf,
    #[arg(long)]
    p: Option<Exponent>,
    #[arg(long)]
    q: Option<Exponent>,
    /// check: test the unweighted inequality instead of the weighted one.
    #[arg(long)]
    unweighted: bool,
    /// check: rescale the input to unit L^2 norm first.
    #[arg(long)]
    normalize: bool,
    /// violate: side of the inequality.
    #[arg(long, value_enum)]
    side: Option<ViewArg>,
    /// violate: value the weighted entropy sum must drop below.
    #[arg(long, allow_negative_numbers = true)]
    target: Option<f64>,
    /// violate: write the witness as CSV when it fits in memory.
    #[arg(long)]
    witness_output: Option<PathBuf>,
}

/// Errors that carry their own exit code.
#[derive(Debug)]
struct Exit {
    code: u8,
    message: String,
}

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<Exit>() {
        return e.code;
    }
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_capacity() => EXIT_CAPACITY,
        Some(Error::Io(_)) => EXIT_FAILURE,
        Some(_) => EXIT_USAGE,
        None => EXIT_FAILURE,
    }
}

fn usage(message: impl Into<String>) -> anyhow::Error {
    Exit {
        code: EXIT_USAGE,
        message: message.into(),
    }
    .into()
}

fn read_function(path: &PathBuf) -> anyhow::Result<MeasuredFunction> {
    let f = if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf)?;
        read_function_csv(buf.as_slice())?
    } else {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        read_function_csv(BufReader::new(file))?
    };
    Ok(f)
}

fn write_function(f: &MeasuredFunction, path: Option<&PathBuf>) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            write_function_csv(f, io::BufWriter::new(file))?;
        }
        None => write_function_csv(f, io::stdout().lock())?,
    }
    Ok(())
}

fn print_json(value: &impl Serialize) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn cpq_json(c: Cpq) -> Value {
    match c {
        Cpq::Finite(v) => json!(v),
        Cpq::Infinite => Value::Null,
    }
}

impl FamilyArgs {
    fn point(&self, param: usize) -> anyhow::Result<(WitnessPoint, Value)> {
        let (p, q) = (self.p, self.q);
        let out = match self.family {
            Family::Arc => (
                arc_indicator_witness(param, self.m_per_k * param, p, q)?,
                Value::Null,
            ),
            Family::Subgroup => (
                subgroup_indicator_witness(self.r, param, p, q)?,
                Value::Null,
            ),
            Family::FullOrbit => (full_orbit_witness(param, p, q)?, Value::Null),
            Family::Chirp => (chirp_witness(self.r, param, q)?, Value::Null),
            Family::LacunaryCompact => (
                lacunary_compact_witness(param, self.beta, self.c, p, q)?,
                Value::Null,
            ),
            Family::LacunaryDiscrete => {
                let grid = self
                    .grid_factor
                    .checked_mul(1usize.checked_shl(param as u32).unwrap_or(usize::MAX))
                    .ok_or_else(|| usage("grid size overflows"))?;
                let rep = lacunary_discrete_witness(param, p, q, grid)?;
                let extra = json!({
                    "l2_quadrature": rep.l2_quadrature,
                    "l2_exact": rep.l2_exact,
                    "transform_terms": rep.transform,
                });
                (rep.point, extra)
            }
            Family::Clt => {
                let rep = clt_delta_witness(self.r, param, p, q)?;
                let extra = json!({
                    "sigma_squared": rep.sigma_squared,
                    "threshold": rep.threshold,
                    "tail_probability": rep.tail_probability,
                });
                (rep.point, extra)
            }
        };
        Ok(out)
    }
}

fn run_witness(args: &WitnessArgs) -> anyhow::Result<()> {
    let fam = &args.family;
    let param = match fam.family {
        Family::Arc => args
            .k
            .ok_or_else(|| usage("--k is required for the arc family"))?,
        Family::FullOrbit | Family::LacunaryCompact => args
            .m
            .ok_or_else(|| usage("--m is required for this family"))?,
        _ => args
            .n
            .ok_or_else(|| usage("--n is required for this family"))?,
    };
    let mut fam = fam.clone();
    if let (Family::Arc, Some(m), Some(k)) = (fam.family, args.m, args.k) {
        if m % k != 0 {
            return Err(usage("--m must be a multiple of --k for the arc family"));
        }
        fam.m_per_k = m / k;
    }
    let (point, extra) = fam.point(param)?;
    let mut value = serde_json::to_value(&point)?;
    if let (Value::Object(map), Value::Object(more)) = (&mut value, extra) {
        map.extend(more);
    }
    print_json(&value)
}

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    if workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?;
    Ok(pool.install(job))
}

fn run_sweep(args: &SweepArgs) -> anyhow::Result<()> {
    use rayon::prelude::*;
    let mut out = io::stdout().lock();
    match args.kind {
        SweepKind::Witness => {
            let family = args
                .family
                .ok_or_else(|| usage("--family is required for witness sweeps"))?;
            if args.values.is_empty() {
                return Err(usage("--values is required for witness sweeps"));
            }
            let fam = FamilyArgs {
                family,
                r: args.r,
                p: args.p,
                q: args.q,
                m_per_k: args.m_per_k,
                beta: args.beta,
                c: args.c,
                grid_factor: args.grid_factor,
            };
            let rows: Vec<anyhow::Result<WitnessPoint>> = with_workers(args.workers, || {
                args.values
                    .par_iter()
                    .map(|&n| fam.point(n).map(|(p, _)| p))
                    .collect()
            })?;
            writeln!(
                out,
                "family,param_n,group_size,p,q,norm_f,norm_fhat,ratio,prediction,prediction_kind"
            )?;
            for row in rows {
                let w = row?;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    w.family,
                    w.param_n,
                    w.group_size,
                    fmt_exponent(w.p),
                    fmt_exponent(w.q),
                    fmt_f64(w.norm_f),
                    fmt_f64(w.norm_fhat),
                    fmt_f64(w.ratio),
                    w.prediction.map(fmt_f64).unwrap_or_default(),
                    w.prediction_kind.map(|k| k.as_str()).unwrap_or_default(),
                )?;
            }
        }
        SweepKind::Region => {
            if !(args.max.is_finite() && args.max >= 0.0) || args.steps == 0 {
                return Err(usage("--max must be nonnegative and --steps positive"));
            }
            let sides: Vec<View> = match args.side {
                Some(s) => vec![s.into()],
                None => vec![View::Compact, View::Discrete],
            };
            let h = args.max / args.steps as f64;
            let grid: Vec<(View, f64, f64)> = sides
                .iter()
                .flat_map(|&side| {
                    (0..=args.steps).flat_map(move |i| {
                        (0..=args.steps).map(move |j| (side, i as f64 * h, j as f64 * h))
                    })
                })
                .collect();
            let rows: Vec<_> = with_workers(args.workers, || {
                grid.par_iter()
                    .map(|&(side, u, v)| classify_with_mass(side, u, v, 1.0))
                    .collect()
            })?;
            writeln!(out, "u,v,side,label,finite,value")?;
            for (&(_, u, v), row) in grid.iter().zip(rows) {
                let r = row?;
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    fmt_f64(u),
                    fmt_f64(v),
                    r.side,
                    r.label,
                    r.finite,
                    r.value.map(fmt_f64).unwrap_or_default()
                )?;
            }
        }
    }
    Ok(())
}

fn fmt_exponent(e: Exponent) -> String {
    if e.is_infinite() {
        "inf".into()
    } else {
        fmt_f64(e.p())
    }
}

fn require<T>(v: Option<T>, flag: &str) -> anyhow::Result<T> {
    v.ok_or_else(|| usage(format!("{flag} is required in this mode")))
}

fn run_uncertainty(args: &UncertaintyArgs) -> anyhow::Result<()> {
    match args.mode {
        UncertaintyMode::Check => {
            let (p, q) = (require(args.p, "--p")?, require(args.q, "--q")?);
            let mut psi = read_function(&args.input)?;
            if args.normalize {
                psi = lcanorm_core::uncertainty::normalize_l2(&psi)?;
            }
            let report = if args.unweighted {
                unweighted_up_margin(&psi, p, q)?
            } else {
                weighted_up_margin(&psi, p, q)?
            };
            print_json(&json!({
                "mode": "check",
                "inequality": if args.unweighted { "unweighted" } else { "weighted" },
                "group": psi.spec().to_string(),
                "p": p,
                "q": q,
                "lhs": report.lhs,
                "rhs": report.rhs,
                "margin": report.margin,
                "satisfied": report.satisfied,
            }))
        }
        UncertaintyMode::Violate => {
            let (p, q) = (require(args.p, "--p")?, require(args.q, "--q")?);
            let side: View = require(args.side, "--side")?.into();
            let target = require(args.target, "--target")?;
            let rep = weighted_up_violator(target, p, q, side)?;
            let mut written = Value::Null;
            if let Some(path) = &args.witness_output {
                write_function(&rep.witness.materialize()?, Some(path))?;
                written = json!(path.display().to_string());
            }
            let factor: Vec<[f64; 2]> = rep
                .witness
                .factor
                .values()
                .iter()
                .map(|z| [z.re, z.im])
                .collect();
            print_json(&json!({
                "mode": "violate",
                "side": side,
                "p": p,
                "q": q,
                "target": target,
                "value": rep.value,
                "copies": rep.witness.copies,
                "group": rep.witness.spec_string(),
                "factor_group": rep.witness.factor.spec().to_string(),
                "factor_values": factor,
                "witness_file": written,
            }))
        }
        UncertaintyMode::Support => {
            let psi = read_function(&args.input)?;
            let ds = donoho_stark_check(&psi)?;
            print_json(&json!({
                "mode": "support",
                "group": psi.spec().to_string(),
                "support_product": support_product(&psi)?,
                "n_t": ds.n_t,
                "n_w": ds.n_w,
                "product": ds.product,
                "group_size": psi.spec().size(),
            }))
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if cli.selftest {
        let checks = lcanorm_core::selftest::run(cli.seed);
        print_json(&checks)?;
        if checks.iter().any(|c| !c.passed) {
            bail!(Exit {
                code: EXIT_FAILURE,
                message: "self test failed".into(),
            });
        }
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(usage("a subcommand or --selftest is required; see --help"));
    };
    match command {
        Command::Info { group } => print_json(&json!({
            "group": group.to_string(),
            "orders": group.orders(),
            "view": group.view(),
            "mass": group.mass(),
            "size": group.size(),
            "exponent": group.exponent(),
            "primal_atom": group.primal_atom(),
            "dual_atom": group.dual_atom(),
            "primal_total": group.primal_total(),
            "dual_total": group.dual_total(),
        })),
        Command::Transform {
            input,
            output,
            inverse: inv,
            direct,
        } => {
            let f = read_function(&input)?;
            let out = match (inv, direct) {
                (false, false) => forward(&f)?,
                (false, true) => forward_direct(&f)?,
                (true, false) => inverse(&f)?,
                (true, true) => inverse_direct(&f)?,
            };
            write_function(&out, output.as_ref())
        }
        Command::Norm { input, p } => {
            let f = read_function(&input)?;
            print_json(&json!({
                "group": f.spec().to_string(),
                "side": f.side().as_str(),
                "p": p,
                "norm": lp_norm(&f, p),
            }))
        }
        Command::Region { side, u, v, mass } => {
            let r = classify_with_mass(side.into(), u, v, mass)?;
            print_json(&json!({
                "u": u,
                "v": v,
                "side": r.side,
                "label": r.label,
                "finite": r.finite,
                "value": r.value,
            }))
        }
        Command::Cpq { group, p, q } => {
            let r = classify_spec(&group, p, q);
            print_json(&json!({
                "group": group.to_string(),
                "p": p,
                "q": q,
                "region": r.label,
                "finite": r.finite,
                "value": cpq_json(closed_form_cpq(&group, p, q)),
            }))
        }
        Command::Witness(args) => run_witness(&args),
        Command::Sweep(args) => run_sweep(&args),
        Command::Estimate {
            group,
            p,
            q,
            restarts,
            max_iters,
            step_shrink,
            rel_tol,
            smoothing_eps,
            witness_output,
        } => {
            let cfg = EstimatorConfig {
                restarts,
                max_iters,
                step_shrink,
                rel_tol,
                smoothing_eps,
                seed: cli.seed,
            };
            let est = estimate(&group, p, q, &cfg)?;
            print_json(&json!({
                "group": group.to_string(),
                "p": p,
                "q": q,
                "estimate": est.value,
                "closed_form": cpq_json(closed_form_cpq(&group, p, q)),
                "region": classify_spec(&group, p, q).label,
                "converged": est.converged,
                "iterations": est.iterations,
            }))?;
            if let Some(path) = witness_output {
                write_function(&est.witness, Some(&path))?;
            }
            if !est.converged {
                bail!(Exit {
                    code: EXIT_NOT_CONVERGED,
                    message: format!("ascent did not converge in {max_iters} iterations"),
                });
            }
            Ok(())
        }
        Command::Uncertainty(args) => run_uncertainty(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
