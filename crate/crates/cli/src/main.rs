mod render;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dicke_atlas::analytic::{analytic_ground_energy, critical_couplings, BOUNDARY_RTOL, EXACT_ZERO_RTOL};
use dicke_atlas::classifier::{classify_with, sweep, sweep_verified, AxisName, AxisSpec, SweepSpec, VERIFY_ENERGY_TOL};
use dicke_atlas::exact::{finite_size_scan, EdConfig, MAX_DIMENSION};
use dicke_atlas::landscape::{marginal_tolerance, scaled_energy};
use dicke_atlas::oracle::{global_minima, SearchSpec};
use dicke_atlas::symmetry::{
    coxeter_report, energy_invariance, phase_exchange_check, sample_params, table2_verdicts, Agreement, CoxeterGroup,
    Transform, DEFAULT_SEED, ENERGY_TOL,
};
use dicke_atlas::model::AngleFamily;
use dicke_atlas::{Error, ModelParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use render::{nums, num, opt_num, order_json, params_json, state_json, text, with_manifest, Manifest};

/// Mean-field phase atlas of the anisotropic Dicke model.
#[derive(Parser)]
#[command(name = "dicke-atlas", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one parameter point.
    Solve(SolveArgs),
    /// Classify a two-axis grid and write CSV.
    Sweep(SweepArgs),
    /// Critical couplings as functions of t, as CSV.
    Boundaries(BoundaryArgs),
    /// Symmetry audits.
    Symmetry(SymmetryArgs),
    /// Finite-N exact diagonalization.
    Exact(ExactArgs),
}

#[derive(Args, Clone)]
struct PointArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    omega: f64,
    #[arg(long = "Omega", default_value_t = 1.0, allow_hyphen_values = true)]
    big_omega: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    kappa: f64,
    #[arg(long = "U", default_value_t = 0.0, allow_hyphen_values = true)]
    u: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

impl PointArgs {
    fn params(&self) -> Result<ModelParams, Error> {
        ModelParams::new(self.omega, self.big_omega, self.lambda, self.kappa, self.u)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Use the numerical minimizer even where closed forms apply.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    point: PointArgs,
    /// name:min:max:count with name one of lambda, kappa, Omega, t, U.
    #[arg(long)]
    axis1: String,
    #[arg(long)]
    axis2: String,
    /// Fixed kappa/lambda ratio when neither axis is t.
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    /// Re-run every k-th cell through the numerical minimizer.
    #[arg(long)]
    verify_every: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BoundaryArgs {
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long = "Omega", default_value_t = 1.0)]
    big_omega: f64,
    /// min:max:count
    #[arg(long, default_value = "-3:3:121", allow_hyphen_values = true)]
    t_range: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Check {
    Relations,
    Invariance,
    Table2,
    Exchange,
    All,
}

#[derive(Args)]
struct SymmetryArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long, value_enum, default_value_t = Check::All)]
    check: Check,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long = "N")]
    n: Option<usize>,
    /// Comma-separated atom numbers.
    #[arg(long = "N-list", value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// Initial photon cutoff; doubled until converged.
    #[arg(long, default_value_t = 16)]
    nmax: usize,
    #[arg(long, default_value_t = 1e-10)]
    convergence_tol: f64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Convergence { .. } | Error::Eigensolver(_) => 3,
            Error::Verification { .. } => 4,
            Error::Dimension { .. } => 5,
            _ => 2,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(1, e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::new(1, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn print_json(v: &Value) -> Outcome {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(|e| Failure::new(1, e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("reports are objects"),
    }
}

/// Write through a temporary file in the target directory so a failed run leaves nothing behind.
fn write_atomically(path: &Path, fill: impl FnOnce(&mut fs::File) -> Outcome) -> Outcome {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    fill(tmp.as_file_mut())?;
    tmp.as_file_mut().flush()?;
    tmp.persist(path).map_err(|e| Failure::new(1, e.to_string()))?;
    Ok(())
}

fn base_tolerances(p: &ModelParams) -> Value {
    json!({
        "boundary_rtol": num(BOUNDARY_RTOL),
        "exact_zero_rtol": num(EXACT_ZERO_RTOL),
        "marginal": num(marginal_tolerance(p)),
    })
}

fn cmd_solve(args: &SolveArgs) -> Outcome {
    let start = Instant::now();
    let p = args.point.params()?;
    let report = classify_with(&p, args.oracle)?;
    let minimizers: Vec<Value> = report
        .minimizers
        .states
        .iter()
        .map(|s| state_json(s, scaled_energy(&p, s)))
        .collect();
    let metastable: Vec<Value> = report.metastable.iter().map(|s| state_json(s, scaled_energy(&p, s))).collect();
    let body = json!({
        "params": params_json(&p),
        "phase": report.label.as_str(),
        "minimizers": minimizers,
        "degenerate_manifold": report.minimizers.degenerate_manifold,
        "ground_energy": num(report.ground_energy),
        "order_parameters": order_json(&report.order_params),
        "hessian_eigenvalues": nums(&report.stability.eigenvalues),
        "stability": {
            "class": format!("{:?}", report.stability.class),
            "rank_reduced": report.stability.rank_reduced,
            "np_stable": report.np_stable,
            "metastable": metastable,
        },
        "method": report.method.as_str(),
    });
    let mut tol = base_tolerances(&p);
    if report.method.as_str() == "oracle" {
        let spec = SearchSpec::default_for(&p);
        tol["refine_tol"] = num(spec.refine_tol);
        tol["degeneracy_rtol"] = num(spec.degeneracy_rtol);
        tol["angle_tol"] = num(spec.angle_tol);
    }
    let manifest = Manifest { command: "solve".into(), params: params_json(&p), tolerances: tol, seed: args.point.seed };
    print_json(&with_manifest(object(body), &manifest, start.elapsed()))
}

pub const SWEEP_HEADER: [&str; 16] = [
    "lambda", "kappa", "omega", "Omega", "U", "t", "phase", "n_photon", "jz", "jx", "jy", "energy", "m1", "m2", "m3", "m4",
];

fn cmd_sweep(args: &SweepArgs) -> Outcome {
    let start = Instant::now();
    let axis = |s: &str| s.parse::<AxisSpec>().map_err(Failure::from);
    let axes = [axis(&args.axis1)?, axis(&args.axis2)?];
    let fixed = args.point.params()?;
    let has_t = axes.iter().any(|a| a.name == AxisName::T);
    let spec = SweepSpec::new(fixed, if has_t { None } else { args.t }, axes)?;
    let grid = match args.verify_every {
        Some(k) => sweep_verified(&spec, k)?,
        None => sweep(&spec)?,
    };
    write_atomically(&args.out, |file| {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
        w.write_record(SWEEP_HEADER)?;
        for c in &grid.cells {
            let p = &c.params;
            let mut row = vec![text(p.lambda()), text(p.kappa()), text(p.omega()), text(p.big_omega()), text(p.u())];
            row.push(c.t.map(text).unwrap_or_default());
            row.push(c.label.as_str().to_string());
            row.extend([c.order.n_photon, c.order.jz, c.order.jx, c.order.jy, c.energy].map(text));
            row.extend(c.eigenvalues.map(text));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    })?;
    let tol = json!({
        "boundary_rtol": num(BOUNDARY_RTOL),
        "verify_every": args.verify_every,
        "verify_energy_tol": num(VERIFY_ENERGY_TOL),
    });
    let params = json!({
        "fixed": params_json(&fixed),
        "t": opt_num(spec.fixed_t),
        "axis1": args.axis1,
        "axis2": args.axis2,
    });
    let manifest = Manifest { command: "sweep".into(), params, tolerances: tol, seed: args.point.seed };
    let doc = with_manifest(
        object(json!({ "out": args.out.display().to_string(), "cells": grid.cells.len() })),
        &manifest,
        start.elapsed(),
    );
    let mut side = args.out.clone().into_os_string();
    side.push(".manifest.json");
    write_atomically(Path::new(&side), |f| {
        serde_json::to_writer_pretty(&mut *f, &doc).map_err(|e| Failure::new(1, e.to_string()))?;
        writeln!(f)?;
        Ok(())
    })?;
    print_json(&doc)
}

fn parse_range(s: &str) -> Result<(f64, f64, usize), Failure> {
    let bad = || Failure::new(2, format!("invalid range '{s}', expected min:max:count"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else { return Err(bad()) };
    let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    let n: usize = n.parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite()) || n == 0 || b < a || (n == 1 && a != b) {
        return Err(bad());
    }
    Ok((a, b, n))
}

fn cmd_boundaries(args: &BoundaryArgs) -> Outcome {
    let start = Instant::now();
    let (lo, hi, n) = parse_range(&args.t_range)?;
    let base = ModelParams::new(args.omega, args.big_omega, 1.0, 0.0, 0.0)?;
    let mut rows = Vec::new();
    for i in 0..n {
        let t = if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
        let c = critical_couplings(&ModelParams::with_ratio(args.omega, args.big_omega, 1.0, t)?)?;
        if let Some(x) = c.lambda_c_x {
            rows.push((t, "np_edge", x));
        }
        let sp = if t >= 0.0 { c.lambda_c_x } else { c.lambda_c_p };
        if let Some(x) = sp {
            rows.push((t, "sp_edge", x));
        }
    }
    let emit = |w: &mut dyn std::io::Write| -> Outcome {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        w.write_record(["t", "curve", "lambda_critical"])?;
        for (t, curve, x) in &rows {
            w.write_record([text(*t), curve.to_string(), text(*x)])?;
        }
        w.flush()?;
        Ok(())
    };
    let manifest = Manifest {
        command: "boundaries".into(),
        params: json!({ "omega": num(args.omega), "Omega": num(args.big_omega), "t_range": args.t_range }),
        tolerances: base_tolerances(&base),
        seed: args.seed,
    };
    match &args.out {
        Some(path) => {
            write_atomically(path, |f| emit(f))?;
            let doc = with_manifest(
                object(json!({ "out": path.display().to_string(), "rows": rows.len() })),
                &manifest,
                start.elapsed(),
            );
            print_json(&doc)
        }
        None => emit(&mut std::io::stdout().lock()),
    }
}

struct CheckLine {
    name: String,
    status: &'static str,
    measured: Value,
    detail: String,
}

impl CheckLine {
    fn new(name: impl Into<String>, ok: bool, measured: Value, detail: impl Into<String>) -> Self {
        Self { name: name.into(), status: if ok { "pass" } else { "fail" }, measured, detail: detail.into() }
    }

    fn to_json(&self) -> Value {
        json!({ "name": self.name, "status": self.status, "measured": self.measured, "detail": self.detail })
    }
}

const INVARIANCE_SAMPLES: usize = 1000;

fn invariance_checks(seed: u64) -> Vec<CheckLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<ModelParams> = (0..10).map(|_| sample_params(&mut rng)).collect();
    let mut lines = Vec::new();
    for tr in [Transform::ParityPiS, Transform::Sx, Transform::Sp, Transform::C2, Transform::V, Transform::Vprime] {
        let worst = pool
            .iter()
            .enumerate()
            .map(|(k, p)| energy_invariance(&tr, p, INVARIANCE_SAMPLES / pool.len(), seed.wrapping_add(k as u64)))
            .fold(0.0, f64::max);
        lines.push(CheckLine::new(format!("energy {tr}"), worst <= ENERGY_TOL, num(worst), "max |dE|"));
    }
    let lines_u1 = [
        (ModelParams::new(1.0, 1.0, 1.3, 0.0, 0.0).expect("valid"), AngleFamily::CoRotating, "kappa = 0"),
        (ModelParams::new(1.0, 1.0, 0.0, 1.3, 0.0).expect("valid"), AngleFamily::CounterRotating, "lambda = 0"),
    ];
    for (p, sense, label) in lines_u1 {
        let worst = (0..32)
            .map(|k| {
                let phi = std::f64::consts::TAU * k as f64 / 32.0;
                energy_invariance(&Transform::U1 { phi, sense }, &p, 32, seed)
            })
            .fold(0.0, f64::max);
        lines.push(CheckLine::new(format!("energy U1 on {label}"), worst <= ENERGY_TOL, num(worst), "max |dE| over 32 angles"));
    }
    lines
}

fn cmd_symmetry(args: &SymmetryArgs) -> Outcome {
    let start = Instant::now();
    let p = args.point.params()?;
    let want = |c: Check| args.check == c || args.check == Check::All;
    let mut lines: Vec<CheckLine> = Vec::new();

    if want(Check::Relations) {
        for group in [CoxeterGroup::W, CoxeterGroup::Wprime] {
            for (name, ok) in coxeter_report(group, args.point.seed) {
                lines.push(CheckLine::new(format!("{group:?} {name}"), ok, Value::Null, "identity on sampled points"));
            }
        }
    }
    if want(Check::Invariance) {
        lines.extend(invariance_checks(args.point.seed));
    }
    if want(Check::Table2) {
        let report = table2_verdicts(&p)?;
        for row in &report.rows {
            let status = match row.agreement {
                Agreement::Match => "pass",
                Agreement::Mismatch => "fail",
                Agreement::Ambiguous => "ambiguous",
            };
            let v = &row.verdict;
            lines.push(CheckLine {
                name: format!("table2 {} {}", report.phase, row.column.as_str()),
                status,
                measured: json!({
                    "max_energy_delta": num(v.max_energy_delta),
                    "energy_invariant": v.energy_invariant,
                    "manifold_preserved": v.manifold_preserved,
                    "each_state_fixed": v.each_state_fixed,
                    "phase_image": v.phase_image.as_str(),
                    "expected": row.expected,
                }),
                detail: "state-fixed verdict".into(),
            });
        }
    }
    if want(Check::Exchange) {
        for tr in [Transform::St, Transform::StPrime] {
            let out = phase_exchange_check(&tr, &p)?;
            lines.push(CheckLine::new(
                format!("exchange {tr}"),
                out.mapping_ok,
                json!({ "original": out.original.as_str(), "image": out.image.as_str(),
                        "labels_ok": out.labels_ok, "minimizers_ok": out.minimizers_ok }),
                format!("{} -> {}", out.original, out.image),
            ));
        }
    }

    let passed = lines.iter().all(|l| l.status != "fail");
    let body = json!({
        "params": params_json(&p),
        "checks": lines.iter().map(CheckLine::to_json).collect::<Vec<_>>(),
        "passed": passed,
    });
    let tol = json!({ "energy": num(ENERGY_TOL), "invariance_samples": INVARIANCE_SAMPLES });
    let manifest = Manifest { command: "symmetry".into(), params: params_json(&p), tolerances: tol, seed: args.point.seed };
    print_json(&with_manifest(object(body), &manifest, start.elapsed()))?;
    if passed {
        Ok(())
    } else {
        Err(Failure::new(4, "symmetry check failed"))
    }
}

fn mean_field_energy(p: &ModelParams) -> Result<f64, Error> {
    if p.u() == 0.0 {
        analytic_ground_energy(p)
    } else {
        Ok(global_minima(p, &SearchSpec::default_for(p))?.ground_energy)
    }
}

fn cmd_exact(args: &ExactArgs) -> Outcome {
    let start = Instant::now();
    let p = args.point.params()?;
    let ns: Vec<usize> = match (&args.n, &args.n_list) {
        (Some(n), None) => vec![*n],
        (None, Some(list)) if !list.is_empty() => list.clone(),
        _ => return Err(Failure::new(2, "give exactly one of --N and --N-list")),
    };
    let template = EdConfig { convergence_tol: args.convergence_tol, ..EdConfig::new(1, args.nmax) };
    for &n in &ns {
        EdConfig { n_atoms: n, ..template }.validate()?;
    }
    let results = finite_size_scan(&p, &ns, &template)?;
    let reference = mean_field_energy(&p)?;
    let rows: Vec<Value> = results
        .iter()
        .map(|r| {
            json!({
                "N": r.n_atoms,
                "e0": num(r.e0_per_atom * r.n_atoms as f64),
                "e0_per_atom": num(r.e0_per_atom),
                "n_photon_per_atom": num(r.n_photon_per_atom),
                "jz_per_atom": num(r.jz_per_atom),
                "jperp2": num(r.jperp2),
                "parity": num(r.parity),
                "cutoff_used": r.cutoff_used,
                "top_weight": num(r.top_weight),
                "gap_to_mean_field": num(r.e0_per_atom - reference),
            })
        })
        .collect();
    let body = json!({
        "params": params_json(&p),
        "mean_field_energy": num(reference),
        "results": rows,
    });
    let tol = json!({
        "convergence_tol": num(template.convergence_tol),
        "eigen_tol": num(template.eigen_tol),
        "initial_nmax": args.nmax,
        "max_dimension": MAX_DIMENSION,
    });
    let manifest = Manifest { command: "exact".into(), params: params_json(&p), tolerances: tol, seed: args.point.seed };
    print_json(&with_manifest(object(body), &manifest, start.elapsed()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Boundaries(a) => cmd_boundaries(a),
        Command::Symmetry(a) => cmd_symmetry(a),
        Command::Exact(a) => cmd_exact(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
