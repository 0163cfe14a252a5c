//! Phase labels per parameter point and two-dimensional sweeps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    natural_branch, np_stable, sp_condensed, sp_ground_energy, sp_solutions, SpBranch,
    DEFAULT_FAMILY_SAMPLES,
};
use crate::error::{Error, Result};
use crate::landscape::{classify_stability, StabilityClass, StabilityReport};
use crate::model::{
    angle_distance, order_parameters, AngleFamily, MeanFieldState, ModelParams, OrderParameters,
    PhaseLabel, HALF_PI,
};
use crate::oracle::{global_minima, MinimizerSet, SearchSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Oracle,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub params: ModelParams,
    pub label: PhaseLabel,
    pub np_stable: bool,
    pub sp_branch: Option<SpBranch>,
    /// Global minima.
    pub minimizers: MinimizerSet,
    /// Local minima above the ground energy (the normal phase inside a coexistence band).
    pub metastable: Vec<MeanFieldState>,
    /// Order parameters of the first (upper) global minimizer.
    pub order_params: OrderParameters,
    pub ground_energy: f64,
    pub stability: StabilityReport,
    pub method: Method,
}

fn sp_label(branch: SpBranch, params: &ModelParams) -> PhaseLabel {
    let (l, k) = (params.lambda(), params.kappa());
    match branch {
        SpBranch::DegLambda if l > 0.0 => PhaseLabel::SP0,
        SpBranch::DegLambda => PhaseLabel::RSP0,
        SpBranch::DegKappa if k > 0.0 => PhaseLabel::SPX,
        SpBranch::DegKappa => PhaseLabel::SPP,
        SpBranch::X if l > 0.0 => PhaseLabel::X_SP,
        SpBranch::X => PhaseLabel::X_RSP,
        SpBranch::P if l > 0.0 => PhaseLabel::P_SP,
        SpBranch::P => PhaseLabel::P_RSP,
    }
}

fn with_coexistence(label: PhaseLabel) -> PhaseLabel {
    match label {
        PhaseLabel::P_SP => PhaseLabel::COEX_PSP_NP,
        PhaseLabel::P_RSP => PhaseLabel::COEX_PRSP_NP,
        other => other,
    }
}

fn family_of(branch: SpBranch) -> Option<AngleFamily> {
    match branch {
        SpBranch::DegLambda => Some(AngleFamily::CoRotating),
        SpBranch::DegKappa => Some(AngleFamily::CounterRotating),
        _ => None,
    }
}

fn classify_analytic(params: &ModelParams) -> Result<PhaseReport> {
    let np = np_stable(params)?;
    let branch = natural_branch(params).filter(|&b| sp_condensed(params, b));
    let origin = MeanFieldState::origin();

    let (label, minimizers, metastable) = match branch {
        None => {
            let set = MinimizerSet {
                states: vec![origin],
                ground_energy: -0.5 * params.big_omega(),
                degenerate_manifold: false,
                family: None,
            };
            (PhaseLabel::NP, set, Vec::new())
        }
        Some(b) => {
            let states = sp_solutions(params, b, DEFAULT_FAMILY_SAMPLES)?;
            let set = MinimizerSet {
                states,
                ground_energy: sp_ground_energy(params, b)?,
                degenerate_manifold: family_of(b).is_some(),
                family: family_of(b),
            };
            let label = sp_label(b, params);
            if np {
                (with_coexistence(label), set, vec![origin])
            } else {
                (label, set, Vec::new())
            }
        }
    };
    let ground = minimizers.states[0];
    let stability = classify_stability(params, &ground, label == PhaseLabel::NP)?;
    Ok(PhaseReport {
        params: *params,
        label,
        np_stable: np,
        sp_branch: branch,
        order_params: order_parameters(&ground),
        ground_energy: minimizers.ground_energy,
        minimizers,
        metastable,
        stability,
        method: Method::Analytic,
    })
}

/// Tolerance on phase differences when reading a label off a minimizer.
const ANGLE_LABEL_TOL: f64 = 1e-4;

fn near_multiple_of_pi(x: f64, offset: f64) -> bool {
    let d = (x - offset).rem_euclid(std::f64::consts::PI);
    d.min(std::f64::consts::PI - d) < ANGLE_LABEL_TOL
}

/// Label read off the structure of an oracle minimizer set.
fn structural_label(set: &MinimizerSet) -> (PhaseLabel, Option<SpBranch>) {
    if set.is_normal() {
        return (PhaseLabel::NP, None);
    }
    let s = set.ground_state();
    let (diff, sum) = (s.theta() - s.eta(), s.theta() + s.eta());
    match set.family {
        Some(AngleFamily::CoRotating) => {
            let label = if diff.cos() > 0.0 { PhaseLabel::SP0 } else { PhaseLabel::RSP0 };
            return (label, Some(SpBranch::DegLambda));
        }
        Some(AngleFamily::CounterRotating) => {
            let label = if sum.cos() > 0.0 { PhaseLabel::SPX } else { PhaseLabel::SPP };
            return (label, Some(SpBranch::DegKappa));
        }
        None => {}
    }
    let co = angle_distance(diff, 0.0) < ANGLE_LABEL_TOL;
    let reversed = angle_distance(diff, std::f64::consts::PI) < ANGLE_LABEL_TOL;
    if near_multiple_of_pi(s.theta(), 0.0) && near_multiple_of_pi(s.eta(), 0.0) {
        if co {
            return (PhaseLabel::X_SP, Some(SpBranch::X));
        }
        if reversed {
            return (PhaseLabel::X_RSP, Some(SpBranch::X));
        }
    }
    if near_multiple_of_pi(s.theta(), HALF_PI) && near_multiple_of_pi(s.eta(), HALF_PI) {
        if co {
            return (PhaseLabel::P_SP, Some(SpBranch::P));
        }
        if reversed {
            return (PhaseLabel::P_RSP, Some(SpBranch::P));
        }
    }
    // phase differences outside every known pattern
    (PhaseLabel::UNSTABLE, None)
}

fn classify_oracle(params: &ModelParams) -> Result<PhaseReport> {
    let minimizers = global_minima(params, &SearchSpec::default_for(params))?;
    let (mut label, sp_branch) = structural_label(&minimizers);
    let origin = MeanFieldState::origin();
    let np_report = classify_stability(params, &origin, true)?;
    let np = np_report.class.is_locally_stable();

    let ground = *minimizers.ground_state();
    let at_np = label == PhaseLabel::NP;
    let stability = classify_stability(params, &ground, at_np)?;
    if matches!(stability.class, StabilityClass::Saddle | StabilityClass::Maximum) {
        label = PhaseLabel::UNSTABLE;
    }
    let mut metastable = Vec::new();
    if np && !at_np && label != PhaseLabel::UNSTABLE {
        metastable.push(origin);
        label = with_coexistence(label);
    }
    Ok(PhaseReport {
        params: *params,
        label,
        np_stable: np,
        sp_branch,
        order_params: order_parameters(&ground),
        ground_energy: minimizers.ground_energy,
        minimizers,
        metastable,
        stability,
        method: Method::Oracle,
    })
}

/// Closed forms at `U = 0`, the variational oracle otherwise.
///
/// Fails only when the oracle cannot converge (for instance when the energy is
/// unbounded below).
pub fn classify(params: &ModelParams) -> Result<PhaseReport> {
    classify_with(params, false)
}

pub fn classify_with(params: &ModelParams, force_oracle: bool) -> Result<PhaseReport> {
    if params.u() == 0.0 && !force_oracle {
        classify_analytic(params)
    } else {
        classify_oracle(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AxisName {
    Lambda,
    Kappa,
    BigOmega,
    T,
    U,
}

impl AxisName {
    pub fn as_str(&self) -> &'static str {
        match self {
            AxisName::Lambda => "lambda",
            AxisName::Kappa => "kappa",
            AxisName::BigOmega => "Omega",
            AxisName::T => "t",
            AxisName::U => "U",
        }
    }
}

impl fmt::Display for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxisName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(AxisName::Lambda),
            "kappa" => Ok(AxisName::Kappa),
            "Omega" => Ok(AxisName::BigOmega),
            "t" => Ok(AxisName::T),
            "U" => Ok(AxisName::U),
            other => Err(Error::Axis(format!(
                "unknown axis {other:?} (expected lambda, kappa, Omega, t or U)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn new(name: AxisName, min: f64, max: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Axis(format!("axis {name} needs at least one point")));
        }
        if !(min.is_finite() && max.is_finite()) || min > max {
            return Err(Error::Axis(format!("axis {name} needs finite min <= max")));
        }
        Ok(Self { name, min, max, count })
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count == 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// `name:min:max:count`.
impl FromStr for AxisSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(Error::Axis(format!("expected name:min:max:count, got {s:?}")));
        }
        let num = |x: &str| {
            x.parse::<f64>().map_err(|_| Error::Axis(format!("bad number {x:?} in {s:?}")))
        };
        let count = parts[3]
            .parse::<usize>()
            .map_err(|_| Error::Axis(format!("bad count {:?} in {s:?}", parts[3])))?;
        AxisSpec::new(parts[0].parse()?, num(parts[1])?, num(parts[2])?, count)
    }
}

/// Fixed parameters plus an optional fixed ratio `t` (then `kappa = t lambda` in
/// every cell) and the two swept axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub fixed: ModelParams,
    pub fixed_t: Option<f64>,
    pub axes: [AxisSpec; 2],
}

impl SweepSpec {
    pub fn new(fixed: ModelParams, fixed_t: Option<f64>, axes: [AxisSpec; 2]) -> Result<Self> {
        let [a, b] = axes;
        if a.name == b.name {
            return Err(Error::Axis(format!("axis {} given twice", a.name)));
        }
        let names = [a.name, b.name];
        let t_swept = names.contains(&AxisName::T);
        if names.contains(&AxisName::Kappa) && (t_swept || fixed_t.is_some()) {
            return Err(Error::Axis("kappa cannot vary when t fixes kappa = t lambda".into()));
        }
        if let Some(t) = fixed_t {
            if !t.is_finite() {
                return Err(Error::Axis(format!("fixed t must be finite, got {t}")));
            }
        }
        Ok(Self { fixed, fixed_t, axes })
    }

    pub fn cell_count(&self) -> usize {
        self.axes[0].count * self.axes[1].count
    }

    /// Parameters of cell `(i1, i2)`; `t` axes are applied after the others.
    pub fn cell_params(&self, i1: usize, i2: usize) -> Result<ModelParams> {
        let p = self.fixed;
        let (mut omega_big, mut lambda, mut kappa, mut u) = (p.big_omega(), p.lambda(), p.kappa(), p.u());
        let mut t = self.fixed_t;
        for (axis, i) in self.axes.iter().zip([i1, i2]) {
            let v = axis.value(i);
            match axis.name {
                AxisName::Lambda => lambda = v,
                AxisName::Kappa => kappa = v,
                AxisName::BigOmega => omega_big = v,
                AxisName::U => u = v,
                AxisName::T => t = Some(v),
            }
        }
        if let Some(t) = t {
            kappa = t * lambda;
        }
        ModelParams::new(p.omega(), omega_big, lambda, kappa, u)
            .map_err(|e| Error::Axis(format!("cell ({i1}, {i2}): {e}")))
    }

    /// `t` of a cell: the swept or fixed value, otherwise `kappa / lambda`.
    pub fn cell_t(&self, i1: usize, i2: usize, params: &ModelParams) -> Option<f64> {
        for (axis, i) in self.axes.iter().zip([i1, i2]) {
            if axis.name == AxisName::T {
                return Some(axis.value(i));
            }
        }
        self.fixed_t.or_else(|| params.ratio())
    }
}

/// One row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub params: ModelParams,
    pub t: Option<f64>,
    pub label: PhaseLabel,
    pub order: OrderParameters,
    pub energy: f64,
    pub eigenvalues: [f64; 4],
}

impl CellSummary {
    pub fn from_report(report: &PhaseReport, t: Option<f64>) -> Self {
        Self {
            params: report.params,
            t,
            label: report.label,
            order: report.order_params,
            energy: report.ground_energy,
            eigenvalues: report.stability.eigenvalues,
        }
    }

    /// A cell where no minimum could be found.
    pub fn unstable(params: ModelParams, t: Option<f64>) -> Self {
        let nan = f64::NAN;
        Self {
            params,
            t,
            label: PhaseLabel::UNSTABLE,
            order: OrderParameters { n_photon: nan, jz: nan, jx: nan, jy: nan },
            energy: nan,
            eigenvalues: [nan; 4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub spec: SweepSpec,
    /// Row-major: cell `(i1, i2)` sits at `i1 * count2 + i2`.
    pub cells: Vec<CellSummary>,
}

impl SweepGrid {
    pub fn cell(&self, i1: usize, i2: usize) -> &CellSummary {
        &self.cells[i1 * self.spec.axes[1].count + i2]
    }
}

fn classify_cell(spec: &SweepSpec, index: usize) -> Result<CellSummary> {
    let n2 = spec.axes[1].count;
    let (i1, i2) = (index / n2, index % n2);
    let params = spec.cell_params(i1, i2)?;
    let t = spec.cell_t(i1, i2, &params);
    match classify(&params) {
        Ok(report) => Ok(CellSummary::from_report(&report, t)),
        Err(Error::Convergence { .. }) => Ok(CellSummary::unstable(params, t)),
        Err(e) => Err(e),
    }
}

pub fn sweep(spec: &SweepSpec) -> Result<SweepGrid> {
    let cells = (0..spec.cell_count())
        .into_par_iter()
        .map(|i| classify_cell(spec, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepGrid { spec: *spec, cells })
}

/// Default stride of the oracle spot checks.
pub const DEFAULT_VERIFY_EVERY: usize = 17;

/// Energy agreement required between the closed forms and the oracle.
pub const VERIFY_ENERGY_TOL: f64 = 1e-6;

/// Labels are compared only where the superradiant energy gain exceeds this;
/// closer to a threshold the two minima are numerically indistinguishable.
pub const VERIFY_GAP: f64 = 1e-6;

/// Sweep, then re-solve every `every`-th cell with the oracle and fail on any
/// disagreement.
pub fn sweep_verified(spec: &SweepSpec, every: usize) -> Result<SweepGrid> {
    if every == 0 {
        return Err(Error::Axis("verification stride must be positive".into()));
    }
    let grid = sweep(spec)?;
    let checked: Vec<usize> = (0..grid.cells.len()).step_by(every).collect();
    checked.par_iter().try_for_each(|&i| verify_cell(&grid.cells[i], i))?;
    Ok(grid)
}

fn verify_cell(cell: &CellSummary, index: usize) -> Result<()> {
    if cell.params.u() != 0.0 {
        // already an oracle result
        return Ok(());
    }
    let fail = |detail: String| Err(Error::Verification { cell: index, detail });
    let oracle = match classify_with(&cell.params, true) {
        Ok(r) => r,
        Err(e) => return fail(format!("oracle failed: {e}")),
    };
    if (oracle.ground_energy - cell.energy).abs() > VERIFY_ENERGY_TOL {
        return fail(format!(
            "energy {} (closed form) vs {} (oracle)",
            cell.energy, oracle.ground_energy
        ));
    }
    let gap = -0.5 * cell.params.big_omega() - cell.energy;
    if gap > VERIFY_GAP && oracle.label != cell.label {
        return fail(format!("label {} (closed form) vs {} (oracle)", cell.label, oracle.label));
    }
    Ok(())
}
