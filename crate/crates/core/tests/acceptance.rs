use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dicke_atlas::analytic::{
    analytic_ground_energy, critical_couplings, sp_solutions, table1_order_parameters, BranchSign, SpBranch,
};
use dicke_atlas::classifier::{classify, classify_with, sweep, AxisName, AxisSpec, SweepSpec};
use dicke_atlas::exact::{finite_size_scan, EdConfig};
use dicke_atlas::landscape::{energy_gradient, hessian, hessian_eigenvalues, scaled_energy};
use dicke_atlas::model::{order_parameters, AngleFamily, MeanFieldState, ModelParams, OrderParameters, PhaseLabel};
use dicke_atlas::oracle::{global_minima, SearchSpec};
use dicke_atlas::symmetry::{
    check_coxeter_relations, energy_invariance, phase_exchange_check, sample_params, sample_state, table2_verdicts,
    Agreement, CoxeterGroup, Transform, DEFAULT_SEED,
};
use nalgebra::{Matrix4, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn unit(lambda: f64, kappa: f64) -> ModelParams {
    ModelParams::new(1.0, 1.0, lambda, kappa, 0.0).unwrap()
}

fn ratio(lambda: f64, t: f64) -> ModelParams {
    ModelParams::with_ratio(1.0, 1.0, lambda, t).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn order_gap(a: &OrderParameters, b: &OrderParameters) -> f64 {
    [a.n_photon - b.n_photon, a.jz - b.jz, a.jx - b.jx, a.jy - b.jy]
        .iter()
        .map(|d| d.abs())
        .fold(0.0, f64::max)
}

fn critical_points() -> Outcome {
    let mut worst: f64 = 0.0;
    for (t, expected) in [(0.0, 1.0), (1.0, 0.5), (-1.0, 0.5)] {
        let c = critical_couplings(&ratio(1.0, t)).map_err(|e| e.to_string())?;
        let lc = [c.lambda_c_x, c.lambda_c_p].into_iter().flatten().fold(f64::INFINITY, f64::min);
        worst = worst.max((lc - expected).abs());
        ensure((lc - expected).abs() <= 1e-12, || format!("t={t}: lambda_c={lc}"))?;
    }
    Ok(format!("max error {worst:.1e}"))
}

fn table_one() -> Outcome {
    let (mut worst_analytic, mut worst_oracle): (f64, f64) = (0.0, 0.0);
    for t in [1.0, -1.0, 0.5, -0.5] {
        for lambda in [1.2, 2.0] {
            let p = ratio(lambda, t);
            let phase = if t > 0.0 { PhaseLabel::X_SP } else { PhaseLabel::P_SP };
            let branch = if t > 0.0 { SpBranch::X } else { SpBranch::P };
            let upper = table1_order_parameters(&p, phase, BranchSign::Upper).map_err(|e| e.to_string())?;
            let lower = table1_order_parameters(&p, phase, BranchSign::Lower).map_err(|e| e.to_string())?;

            let report = classify(&p).map_err(|e| e.to_string())?;
            ensure(report.label.ground_phase() == phase, || format!("t={t} lambda={lambda}: label {}", report.label))?;
            let states = sp_solutions(&p, branch, 0).map_err(|e| e.to_string())?;
            ensure(states.len() == 2, || format!("t={t} lambda={lambda}: {} analytic states", states.len()))?;
            let gap = order_gap(&report.order_params, &upper)
                .max(order_gap(&order_parameters(&states[0]), &upper))
                .max(order_gap(&order_parameters(&states[1]), &lower));
            worst_analytic = worst_analytic.max(gap);
            ensure(gap <= 1e-12, || format!("t={t} lambda={lambda}: analytic gap {gap:e}"))?;

            let oracle = classify_with(&p, true).map_err(|e| e.to_string())?;
            ensure(oracle.label.ground_phase() == phase, || format!("t={t} lambda={lambda}: oracle label {}", oracle.label))?;
            for target in [upper, lower] {
                let best = oracle
                    .minimizers
                    .states
                    .iter()
                    .map(|s| order_gap(&order_parameters(s), &target))
                    .fold(f64::INFINITY, f64::min);
                worst_oracle = worst_oracle.max(best);
                ensure(best <= 1e-5, || format!("t={t} lambda={lambda}: oracle gap {best:e}"))?;
            }
        }
    }
    Ok(format!("analytic {worst_analytic:.1e}, oracle {worst_oracle:.1e}"))
}

fn coexistence_widths() -> Outcome {
    let mut notes = Vec::new();
    for (t, expected) in [(-0.5, 4.0 / 3.0), (-2.0, 2.0 / 3.0)] {
        let c = critical_couplings(&ratio(1.0, t)).map_err(|e| e.to_string())?;
        let (lo, hi) = c.coexistence_interval().map_err(|e| e.to_string())?;
        let width = c.coexistence_width().map_err(|e| e.to_string())?;
        ensure((hi - lo - expected).abs() <= 1e-9 && (width - expected).abs() <= 1e-9, || {
            format!("t={t}: interval [{lo}, {hi}], width {width}")
        })?;

        let axis = AxisSpec::new(AxisName::Lambda, 0.0, 4.0, 1601).map_err(|e| e.to_string())?;
        let h = 4.0 / 1600.0;
        let mut count = 0usize;
        for lambda in axis.values() {
            if lambda == 0.0 {
                continue;
            }
            if classify(&ratio(lambda, t)).map_err(|e| e.to_string())?.label.is_coexistence() {
                count += 1;
            }
        }
        let scanned = count as f64 * h;
        ensure((scanned - expected).abs() <= h, || format!("t={t}: scanned width {scanned}"))?;
        notes.push(format!("t={t}: {scanned:.4}"));
    }
    Ok(notes.join(", "))
}

fn hessian_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let (mut worst_eig, mut worst_grad): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let p = sample_params(&mut rng);
        let s = sample_state(&mut rng);
        let closed = hessian_eigenvalues(&p, &s).map_err(|e| e.to_string())?;
        let full = hessian(&p, &s).map_err(|e| e.to_string())?.full();
        let m = Matrix4::from_fn(|i, j| full[i][j]);
        let mut numeric: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        let mut closed_sorted = closed.to_vec();
        numeric.sort_by(f64::total_cmp);
        closed_sorted.sort_by(f64::total_cmp);
        for (a, b) in closed_sorted.iter().zip(&numeric) {
            let err = (a - b).abs() / a.abs().max(1.0);
            worst_eig = worst_eig.max(err);
        }

        let grad = energy_gradient(&p, &s).map_err(|e| e.to_string())?;
        let x = [s.rho(), s.mu(), s.theta(), s.eta()];
        let h = 1e-5;
        for k in 0..4 {
            let shifted = |d: f64| {
                let mut y = x;
                y[k] += d;
                scaled_energy(&p, &MeanFieldState::new(y[0], y[1], y[2], y[3]).unwrap())
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            worst_grad = worst_grad.max((fd - grad[k]).abs() / grad[k].abs().max(1.0));
        }
    }
    ensure(worst_eig <= 1e-10, || format!("eigenvalue error {worst_eig:e}"))?;
    ensure(worst_grad <= 1e-6, || format!("gradient error {worst_grad:e}"))?;
    Ok(format!("eigenvalues {worst_eig:.1e}, gradient {worst_grad:.1e}"))
}

// Label from the boundary curves alone.
fn boundary_label(lambda: f64, t: f64) -> PhaseLabel {
    let (zx, zp) = ((lambda * (1.0 + t)).abs(), (lambda * (1.0 - t)).abs());
    let np = zx <= 1.0;
    let positive = lambda > 0.0;
    if lambda == 0.0 {
        PhaseLabel::NP
    } else if t.abs() < 1e-12 {
        match (zx > 1.0, positive) {
            (false, _) => PhaseLabel::NP,
            (true, true) => PhaseLabel::SP0,
            (true, false) => PhaseLabel::RSP0,
        }
    } else if t > 0.0 {
        match (zx > 1.0, positive) {
            (false, _) => PhaseLabel::NP,
            (true, true) => PhaseLabel::X_SP,
            (true, false) => PhaseLabel::X_RSP,
        }
    } else {
        match (zp > 1.0, np, positive) {
            (false, _, _) => PhaseLabel::NP,
            (true, true, true) => PhaseLabel::COEX_PSP_NP,
            (true, true, false) => PhaseLabel::COEX_PRSP_NP,
            (true, false, true) => PhaseLabel::P_SP,
            (true, false, false) => PhaseLabel::P_RSP,
        }
    }
}

fn phase_diagram() -> Outcome {
    let spec = SweepSpec::new(
        unit(1.0, 0.0),
        None,
        [
            AxisSpec::new(AxisName::Lambda, -4.0, 4.0, 161).map_err(|e| e.to_string())?,
            AxisSpec::new(AxisName::T, -3.0, 3.0, 121).map_err(|e| e.to_string())?,
        ],
    )
    .map_err(|e| e.to_string())?;
    let grid = sweep(&spec).map_err(|e| e.to_string())?;
    let (l_axis, t_axis) = (&spec.axes[0], &spec.axes[1]);

    let mut off_curve = 0usize;
    let mut mislabeled = 0usize;
    for i in 0..161 {
        for j in 0..121 {
            let label = grid.cell(i, j).label;
            if label == boundary_label(l_axis.value(i), t_axis.value(j)) {
                continue;
            }
            off_curve += 1;
            let near = (i.saturating_sub(1)..=(i + 1).min(160))
                .flat_map(|a| (j.saturating_sub(1)..=(j + 1).min(120)).map(move |b| (a, b)))
                .any(|(a, b)| boundary_label(l_axis.value(a), t_axis.value(b)) == label);
            if !near {
                mislabeled += 1;
            }
        }
    }
    ensure(mislabeled == 0, || format!("{mislabeled} cells farther than one cell from a boundary"))?;

    // t -> -2 - t maps row j to row 80 - j; t -> -t maps row j to 120 - j
    let np_mask = |i: usize, j: usize| {
        let l = grid.cell(i, j).label;
        l == PhaseLabel::NP || l.is_coexistence()
    };
    let sp_mask = |i: usize, j: usize| grid.cell(i, j).label.is_superradiant();
    for i in 0..161 {
        for j in 0..=80 {
            ensure(np_mask(i, j) == np_mask(i, 80 - j), || format!("NP boundary asymmetric at ({i}, {j})"))?;
        }
        for j in 0..121 {
            ensure(sp_mask(i, j) == sp_mask(i, 120 - j), || format!("SP boundary asymmetric at ({i}, {j})"))?;
        }
    }
    Ok(format!("{off_curve} cells on boundaries, all within one cell"))
}

fn symmetry_suite() -> Outcome {
    for group in [CoxeterGroup::W, CoxeterGroup::Wprime] {
        ensure(check_coxeter_relations(group), || format!("{group:?} relations fail"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut worst: f64 = 0.0;
    let generators = [Transform::ParityPiS, Transform::Sx, Transform::Sp, Transform::C2, Transform::V, Transform::Vprime];
    for k in 0..10 {
        let p = sample_params(&mut rng);
        for tr in &generators {
            worst = worst.max(energy_invariance(tr, &p, 100, DEFAULT_SEED + k));
        }
    }
    ensure(worst <= 1e-12, || format!("energy invariance {worst:e}"))?;

    let mut worst_u1: f64 = 0.0;
    for (p, sense) in [(unit(1.3, 0.0), AngleFamily::CoRotating), (unit(0.0, 1.3), AngleFamily::CounterRotating)] {
        for k in 0..32 {
            let phi = TAU * k as f64 / 32.0;
            worst_u1 = worst_u1.max(energy_invariance(&Transform::U1 { phi, sense }, &p, 32, DEFAULT_SEED));
        }
    }
    ensure(worst_u1 <= 1e-12, || format!("U(1) invariance {worst_u1:e}"))?;

    let exchanges = [
        (Transform::St, unit(2.5, -2.5), PhaseLabel::P_SP, PhaseLabel::P_RSP),
        (Transform::StPrime, unit(1.0, 1.0), PhaseLabel::X_SP, PhaseLabel::X_RSP),
        (Transform::St, unit(1.5, 0.0), PhaseLabel::SP0, PhaseLabel::SPX),
        (Transform::StPrime, unit(0.0, 1.5), PhaseLabel::SPX, PhaseLabel::RSP0),
        (Transform::St, unit(-1.5, 0.0), PhaseLabel::RSP0, PhaseLabel::SPP),
        (Transform::StPrime, unit(0.0, -1.5), PhaseLabel::SPP, PhaseLabel::SP0),
    ];
    for (tr, p, from, to) in exchanges {
        let out = phase_exchange_check(&tr, &p).map_err(|e| e.to_string())?;
        ensure(out.original.ground_phase() == from && out.image.ground_phase() == to && out.mapping_ok, || {
            format!("{tr} on {from}: {out:?}")
        })?;
    }

    let rows = [
        (unit(0.2, 0.2), PhaseLabel::NP),
        (unit(1.0, 1.0), PhaseLabel::X_SP),
        (unit(-1.0, -1.0), PhaseLabel::X_RSP),
        (unit(2.5, -2.5), PhaseLabel::P_SP),
        (unit(-2.5, 2.5), PhaseLabel::P_RSP),
        (unit(1.5, 0.0), PhaseLabel::SP0),
        (unit(-1.5, 0.0), PhaseLabel::RSP0),
    ];
    for (p, phase) in rows {
        let report = table2_verdicts(&p).map_err(|e| e.to_string())?;
        ensure(report.phase.ground_phase() == phase, || format!("expected {phase}, got {}", report.phase))?;
        if phase.is_continuum() {
            ensure(report.rows.iter().all(|r| r.agreement == Agreement::Ambiguous), || {
                format!("{phase} rows not reported as ambiguous")
            })?;
        } else {
            ensure(report.rows.iter().filter(|r| r.expected.is_some()).all(|r| r.agreement == Agreement::Match), || {
                format!("{phase} table row mismatch")
            })?;
        }
    }
    Ok(format!("energy {worst:.1e}, U(1) {worst_u1:.1e}"))
}

fn finite_size() -> Outcome {
    let template = EdConfig::new(4, 16);
    let ns = [4, 8, 12, 16];
    let sp = finite_size_scan(&ratio(1.0, 1.0), &ns, &template).map_err(|e| e.to_string())?;
    let errs: Vec<f64> = sp.iter().map(|r| (r.e0_per_atom + 1.0625).abs()).collect();
    ensure(errs.windows(2).all(|w| w[1] <= w[0]), || format!("not monotone: {errs:?}"))?;
    ensure(errs[3] < 0.08, || format!("N=16 error {}", errs[3]))?;

    let np = finite_size_scan(&ratio(0.2, 1.0), &ns, &template).map_err(|e| e.to_string())?;
    ensure(np.iter().all(|r| r.n_photon_per_atom < 0.05), || "NP photon number too large".into())?;
    ensure(sp.iter().chain(&np).all(|r| (r.parity.abs() - 1.0).abs() <= 1e-8), || "parity not definite".into())?;
    Ok(format!("errors {}", errs.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>().join(" ")))
}

fn oracle_atlas() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..21 {
        for j in 0..21 {
            let p = unit(-2.0 + 0.2 * i as f64, -2.0 + 0.2 * j as f64);
            let found = global_minima(&p, &SearchSpec::default_for(&p)).map_err(|e| e.to_string())?;
            let exact = analytic_ground_energy(&p).map_err(|e| e.to_string())?;
            let err = (found.ground_energy - exact).abs();
            worst = worst.max(err);
            ensure(err <= 1e-6, || format!("cell ({i}, {j}): {err:e}"))?;
        }
    }
    Ok(format!("max error {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("critical-points", 1, critical_points),
        ("table-one", 30, table_one),
        ("coexistence-widths", 20, coexistence_widths),
        ("hessian-consistency", 10, hessian_consistency),
        ("phase-diagram", 120, phase_diagram),
        ("symmetry-suite", 30, symmetry_suite),
        ("finite-size", 180, finite_size),
        ("oracle-atlas", 300, oracle_atlas),
    ];
    let mut failed = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(note) if elapsed > Duration::from_secs(*budget) => Err(format!("{note}; over budget of {budget} s")),
            other => other,
        };
        let (tag, note) = match &outcome {
            Ok(note) => ("PASS", note),
            Err(note) => ("FAIL", note),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!("{tag} {} {name} ({:.2} s): {note}", k + 1, elapsed.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
