//! Discrete and continuous transformations acting on `(params, state)` pairs,
//! group-relation checks, energy invariance and the phase-exchange tables.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::classify;
use crate::error::{Error, Result};
use crate::landscape::scaled_energy;
use crate::model::{angle_distance, AngleFamily, MeanFieldState, ModelParams, PhaseLabel};
use crate::oracle::{global_minima, MinimizerSet, SearchSpec};

/// Seed of every sampled check unless the caller supplies one.
pub const DEFAULT_SEED: u64 = 0xD1CE;

/// Energy differences below this count as invariance in the sampled checks.
pub const ENERGY_TOL: f64 = 1e-12;

/// Angle tolerance for "maps to the same state".
pub const STATE_ANGLE_TOL: f64 = 1e-6;
const STATE_AMP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Transform {
    /// Rotation by `phi`: `(theta, eta) -> (theta + phi, eta + phi)` for the
    /// co-rotating sense, `(theta + phi, eta - phi)` for the counter-rotating sense.
    U1 { phi: f64, sense: AngleFamily },
    /// Excitation-number parity: `(theta, eta) -> (theta + pi, eta + pi)`.
    ParityPiS,
    Tx,
    Tp,
    /// `(theta, eta) -> (-theta, -eta)`.
    Sx,
    /// `(theta, eta) -> (pi - theta, pi - eta)`.
    Sp,
    /// `Sx` followed by `Sp`: `(theta, eta) -> (theta + pi, eta + pi)`.
    C2,
    /// `eta -> -eta` with `(lambda, kappa) -> (kappa, lambda)`.
    V,
    /// `eta -> pi - eta` with `(lambda, kappa) -> (-kappa, -lambda)`.
    Vprime,
    /// Reflection about the `t = 1` line; acts like `V`.
    St,
    /// Reflection about the `t = -1` line; acts like `Vprime`.
    StPrime,
    /// `St` followed by `StPrime`: `eta -> eta + pi`, `(lambda, kappa) -> (-lambda, -kappa)`.
    C2prime,
    /// Applied left to right.
    Compose(Vec<Transform>),
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::U1 { phi, sense } => write!(f, "U1({phi}, {sense:?})"),
            Transform::Compose(list) => {
                let parts: Vec<String> = list.iter().map(|t| t.to_string()).collect();
                write!(f, "[{}]", parts.join(" ; "))
            }
            other => write!(f, "{other:?}"),
        }
    }
}

fn couplings(params: &ModelParams, lambda: f64, kappa: f64) -> ModelParams {
    params.with_couplings(lambda, kappa).expect("sign changes keep couplings finite")
}

/// Image of `(params, state)` under `tr`.
pub fn apply(tr: &Transform, params: &ModelParams, state: &MeanFieldState) -> (ModelParams, MeanFieldState) {
    let (th, et) = (state.theta(), state.eta());
    let (l, k) = (params.lambda(), params.kappa());
    match tr {
        Transform::U1 { phi, sense } => {
            let eta = match sense {
                AngleFamily::CoRotating => et + phi,
                AngleFamily::CounterRotating => et - phi,
            };
            (*params, state.with_angles(th + phi, eta))
        }
        Transform::ParityPiS | Transform::C2 => (*params, state.with_angles(th + PI, et + PI)),
        Transform::Tx | Transform::Sx => (*params, state.with_angles(-th, -et)),
        Transform::Tp | Transform::Sp => (*params, state.with_angles(PI - th, PI - et)),
        Transform::V | Transform::St => (couplings(params, k, l), state.with_angles(th, -et)),
        Transform::Vprime | Transform::StPrime => (couplings(params, -k, -l), state.with_angles(th, PI - et)),
        Transform::C2prime => (couplings(params, -l, -k), state.with_angles(th, et + PI)),
        Transform::Compose(list) => list
            .iter()
            .fold((*params, *state), |(p, s), t| apply(t, &p, &s)),
    }
}

fn same_pair(a: &(ModelParams, MeanFieldState), b: &(ModelParams, MeanFieldState)) -> bool {
    a.0 == b.0
        && (a.1.rho() - b.1.rho()).abs() <= STATE_AMP_TOL
        && (a.1.mu() - b.1.mu()).abs() <= STATE_AMP_TOL
        && angle_distance(a.1.theta(), b.1.theta()) <= 1e-12
        && angle_distance(a.1.eta(), b.1.eta()) <= 1e-12
}

/// Deterministic pseudo-random parameter set.
pub fn sample_params(rng: &mut ChaCha8Rng) -> ModelParams {
    ModelParams::new(
        rng.gen_range(0.2..3.0),
        rng.gen_range(0.2..3.0),
        rng.gen_range(-3.0..3.0),
        rng.gen_range(-3.0..3.0),
        rng.gen_range(-1.0..1.0),
    )
    .expect("sampled ranges are valid")
}

/// Deterministic pseudo-random state with `rho, mu > 0`.
pub fn sample_state(rng: &mut ChaCha8Rng) -> MeanFieldState {
    MeanFieldState::new(
        rng.gen_range(0.01..3.0),
        rng.gen_range(0.01..0.95),
        rng.gen_range(0.0..std::f64::consts::TAU),
        rng.gen_range(0.0..std::f64::consts::TAU),
    )
    .expect("sampled ranges are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoxeterGroup {
    /// Generated by `Sx, Sp`.
    W,
    /// Generated by `St, StPrime`.
    Wprime,
}

/// Named relations of a group, each as a word that must act as the identity.
pub fn coxeter_relations(group: CoxeterGroup) -> Vec<(&'static str, Transform)> {
    use Transform::*;
    let (a, b, names) = match group {
        CoxeterGroup::W => (Sx, Sp, ["(sx sx)^1", "(sp sp)^1", "(sx sp)^2"]),
        CoxeterGroup::Wprime => (St, StPrime, ["(st st)^1", "(st' st')^1", "(st st')^2"]),
    };
    vec![
        (names[0], Compose(vec![a.clone(), a.clone()])),
        (names[1], Compose(vec![b.clone(), b.clone()])),
        (names[2], Compose(vec![a.clone(), b.clone(), a, b])),
    ]
}

/// Number of sampled `(params, state)` pairs per relation.
pub const RELATION_SAMPLES: usize = 100;

/// Each relation with whether it acted as the identity on every sample.
pub fn coxeter_report(group: CoxeterGroup, seed: u64) -> Vec<(&'static str, bool)> {
    coxeter_relations(group)
        .into_iter()
        .map(|(name, word)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ok = (0..RELATION_SAMPLES).all(|_| {
                let pair = (sample_params(&mut rng), sample_state(&mut rng));
                same_pair(&apply(&word, &pair.0, &pair.1), &pair)
            });
            (name, ok)
        })
        .collect()
}

pub fn check_coxeter_relations(group: CoxeterGroup) -> bool {
    coxeter_report(group, DEFAULT_SEED).iter().all(|(_, ok)| *ok)
}

/// Largest `|E(image) - E(original)|` over `n_samples` pseudo-random states.
pub fn energy_invariance(tr: &Transform, params: &ModelParams, n_samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_samples.max(1))
        .map(|_| {
            let s = sample_state(&mut rng);
            let (p2, s2) = apply(tr, params, &s);
            (scaled_energy(&p2, &s2) - scaled_energy(params, &s)).abs()
        })
        .fold(0.0, f64::max)
}

/// Whether `state` belongs to the minimizer set, treating a continuous family as
/// the whole curve rather than its samples.
pub fn set_contains(set: &MinimizerSet, state: &MeanFieldState) -> bool {
    if set.states.iter().any(|s| s.approx_eq(state, STATE_AMP_TOL.max(1e-8), STATE_ANGLE_TOL)) {
        return true;
    }
    let Some(family) = set.family else { return false };
    let s0 = set.ground_state();
    if (s0.rho() - state.rho()).abs() > 1e-8 || (s0.mu() - state.mu()).abs() > 1e-8 {
        return false;
    }
    match family {
        AngleFamily::CoRotating => {
            angle_distance(s0.theta() - s0.eta(), state.theta() - state.eta()) <= STATE_ANGLE_TOL
        }
        AngleFamily::CounterRotating => {
            angle_distance(s0.theta() + s0.eta(), state.theta() + state.eta()) <= STATE_ANGLE_TOL
        }
    }
}

/// `images` and `target` describe the same set of minima.
pub fn sets_match(images: &MinimizerSet, target: &MinimizerSet) -> bool {
    images.family == target.family
        && images.states.iter().all(|s| set_contains(target, s))
        && target.states.iter().all(|s| set_contains(images, s))
}

/// Image of a whole minimizer set (the family tag is carried along, with the
/// sense swapped when the transform reflects `eta` alone).
pub fn map_set(tr: &Transform, params: &ModelParams, set: &MinimizerSet) -> (ModelParams, MinimizerSet) {
    let image_params = apply(tr, params, &MeanFieldState::origin()).0;
    let states = set.states.iter().map(|s| apply(tr, params, s).1).collect();
    let family = set.family.map(|f| if flips_family(tr) { swap(f) } else { f });
    (image_params, MinimizerSet { states, family, ..set.clone() })
}

fn swap(f: AngleFamily) -> AngleFamily {
    match f {
        AngleFamily::CoRotating => AngleFamily::CounterRotating,
        AngleFamily::CounterRotating => AngleFamily::CoRotating,
    }
}

/// Transforms that reverse `eta` but not `theta` turn `theta - eta` into `theta + eta`.
fn flips_family(tr: &Transform) -> bool {
    match tr {
        Transform::V | Transform::Vprime | Transform::St | Transform::StPrime => true,
        Transform::Compose(list) => list.iter().filter(|t| flips_family(t)).count() % 2 == 1,
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Table2Column {
    U1,
    Sx,
    Sp,
    C2,
    St,
    StPrime,
    C2prime,
}

impl Table2Column {
    pub const ALL: [Table2Column; 7] = [
        Table2Column::U1,
        Table2Column::Sx,
        Table2Column::Sp,
        Table2Column::C2,
        Table2Column::St,
        Table2Column::StPrime,
        Table2Column::C2prime,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Table2Column::U1 => "U1",
            Table2Column::Sx => "Sx",
            Table2Column::Sp => "Sp",
            Table2Column::C2 => "C2",
            Table2Column::St => "St",
            Table2Column::StPrime => "StPrime",
            Table2Column::C2prime => "C2prime",
        }
    }

    /// The transform of this column; the U(1) sense follows the vanishing coupling.
    pub fn transform(&self, params: &ModelParams) -> Transform {
        match self {
            Table2Column::U1 => {
                let sense = if crate::analytic::lambda_is_zero(params) && !crate::analytic::kappa_is_zero(params) {
                    AngleFamily::CounterRotating
                } else {
                    AngleFamily::CoRotating
                };
                Transform::U1 { phi: 0.7, sense }
            }
            Table2Column::Sx => Transform::Sx,
            Table2Column::Sp => Transform::Sp,
            Table2Column::C2 => Transform::C2,
            Table2Column::St => Transform::St,
            Table2Column::StPrime => Transform::StPrime,
            Table2Column::C2prime => Transform::C2prime,
        }
    }
}

/// Tabulated check marks. The four continuum phases are listed too, but their
/// criterion is not operational, so they are never used for pass/fail.
pub fn table2_expected(phase: PhaseLabel, column: Table2Column) -> Option<bool> {
    use Table2Column::*;
    let row: [bool; 7] = match phase.ground_phase() {
        PhaseLabel::NP => [true; 7],
        PhaseLabel::SP0 => [false; 7],
        PhaseLabel::RSP0 => [false, false, false, true, false, false, false],
        PhaseLabel::SPX => [false, true, false, false, false, false, false],
        PhaseLabel::SPP => [false, false, true, false, false, false, false],
        PhaseLabel::X_SP | PhaseLabel::X_RSP => [false, true, false, false, true, false, false],
        PhaseLabel::P_SP | PhaseLabel::P_RSP => [false, false, true, false, false, true, false],
        _ => return None,
    };
    let idx = [U1, Sx, Sp, C2, St, StPrime, C2prime].iter().position(|c| *c == column)?;
    Some(row[idx])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryVerdict {
    pub max_energy_delta: f64,
    pub energy_invariant: bool,
    /// The minimizer set maps onto itself.
    pub manifold_preserved: bool,
    /// Every minimizer maps to itself.
    pub each_state_fixed: bool,
    /// Phase of the transformed parameter point.
    pub phase_image: PhaseLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agreement {
    Match,
    Mismatch,
    /// Continuum phase: reported without a judgement.
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub column: Table2Column,
    pub verdict: SymmetryVerdict,
    pub expected: Option<bool>,
    pub agreement: Agreement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Report {
    pub phase: PhaseLabel,
    pub minimizers: MinimizerSet,
    pub rows: Vec<Table2Row>,
}

impl Table2Report {
    pub fn all_discrete_rows_match(&self) -> bool {
        self.rows.iter().all(|r| r.agreement != Agreement::Mismatch)
    }
}

/// Verdicts of every column at one parameter point, from the oracle minimizers.
pub fn table2_verdicts(params: &ModelParams) -> Result<Table2Report> {
    if params.u() != 0.0 {
        return Err(Error::UnsupportedU(params.u()));
    }
    let phase = classify(params)?.label;
    let minimizers = global_minima(params, &SearchSpec::default_for(params))?;
    let mut rows = Vec::new();
    for column in Table2Column::ALL {
        let tr = column.transform(params);
        let delta = energy_invariance(&tr, params, 256, DEFAULT_SEED);
        let images: Vec<MeanFieldState> = minimizers.states.iter().map(|s| apply(&tr, params, s).1).collect();
        let each_state_fixed = minimizers
            .states
            .iter()
            .zip(&images)
            .all(|(s, t)| s.approx_eq(t, STATE_AMP_TOL.max(1e-8), STATE_ANGLE_TOL));
        let manifold_preserved = images.iter().all(|t| set_contains(&minimizers, t));
        let image_params = apply(&tr, params, &MeanFieldState::origin()).0;
        let verdict = SymmetryVerdict {
            max_energy_delta: delta,
            energy_invariant: delta <= 1e-10,
            manifold_preserved,
            each_state_fixed,
            phase_image: classify(&image_params)?.label,
        };
        let expected = table2_expected(phase, column);
        let agreement = match expected {
            _ if phase.is_continuum() => Agreement::Ambiguous,
            Some(e) if e == verdict.each_state_fixed => Agreement::Match,
            Some(_) => Agreement::Mismatch,
            None => Agreement::Ambiguous,
        };
        rows.push(Table2Row { column, verdict, expected, agreement });
    }
    Ok(Table2Report { phase, minimizers, rows })
}

/// Expected image of a phase under the two parameter reflections.
pub fn exchange_image(tr: &Transform, phase: PhaseLabel) -> Option<PhaseLabel> {
    use PhaseLabel::*;
    let g = phase.ground_phase();
    let image = match tr {
        Transform::St => match g {
            P_SP => P_RSP,
            P_RSP => P_SP,
            SP0 => SPX,
            SPX => SP0,
            RSP0 => SPP,
            SPP => RSP0,
            X_SP | X_RSP | NP => g,
            _ => return None,
        },
        Transform::StPrime => match g {
            X_SP => X_RSP,
            X_RSP => X_SP,
            SPX => RSP0,
            RSP0 => SPX,
            SPP => SP0,
            SP0 => SPP,
            P_SP | P_RSP | NP => g,
            _ => return None,
        },
        _ => return None,
    };
    Some(image)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeOutcome {
    pub original: PhaseLabel,
    pub image: PhaseLabel,
    /// The label pair is listed and the minimizers map onto the image minimizers.
    pub mapping_ok: bool,
    pub labels_ok: bool,
    pub minimizers_ok: bool,
}

pub fn phase_exchange_check(tr: &Transform, params: &ModelParams) -> Result<ExchangeOutcome> {
    if params.u() != 0.0 {
        return Err(Error::UnsupportedU(params.u()));
    }
    if !matches!(tr, Transform::St | Transform::StPrime) {
        return Err(Error::InvalidParams(format!("exchange checks take St or StPrime, got {tr}")));
    }
    let original = classify(params)?;
    let (image_params, mapped) = map_set(tr, params, &original.minimizers);
    let image = classify(&image_params)?;
    let labels_ok = exchange_image(tr, original.label) == Some(image.label.ground_phase())
        && original.label.is_coexistence() == image.label.is_coexistence();
    let minimizers_ok = sets_match(&mapped, &image.minimizers);
    Ok(ExchangeOutcome {
        original: original.label,
        image: image.label,
        mapping_ok: labels_ok && minimizers_ok,
        labels_ok,
        minimizers_ok,
    })
}
