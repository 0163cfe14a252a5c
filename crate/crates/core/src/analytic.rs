//! Closed forms for `U = 0`: superradiant amplitudes, critical couplings,
//! stability regions, coexistence widths and the tabulated order parameters.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MeanFieldState, ModelParams, OrderParameters, PhaseLabel, HALF_PI};

/// Relative threshold below which a coupling counts as exactly zero.
pub const EXACT_ZERO_RTOL: f64 = 1e-12;

/// Relative slack on the critical-coupling comparisons, so that points computed
/// as `lambda_c` itself land on the boundary rather than a rounding error away.
pub const BOUNDARY_RTOL: f64 = 1e-12;

/// Default number of angle representatives for the continuum branches.
pub const DEFAULT_FAMILY_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpBranch {
    /// `theta, eta in {0, pi}`, `zeta_+ = |lambda + kappa|`.
    X,
    /// `theta, eta in {pi/2, 3pi/2}`, `zeta_+ = |lambda - kappa|`.
    P,
    /// `kappa = 0`: `theta - eta` locked to `0` or `pi`, `theta` free.
    DegLambda,
    /// `lambda = 0`: `theta + eta` locked to `0` or `pi`, `theta` free.
    DegKappa,
}

fn scale(params: &ModelParams) -> f64 {
    params.lambda().abs().max(params.kappa().abs()).max(params.omega())
}

pub fn kappa_is_zero(params: &ModelParams) -> bool {
    params.kappa().abs() < EXACT_ZERO_RTOL * scale(params)
}

pub fn lambda_is_zero(params: &ModelParams) -> bool {
    params.lambda().abs() < EXACT_ZERO_RTOL * scale(params)
}

fn require_u0(params: &ModelParams) -> Result<()> {
    if params.u() != 0.0 {
        Err(Error::UnsupportedU(params.u()))
    } else {
        Ok(())
    }
}

/// The branch a nonzero point would condense into, ignoring thresholds.
pub fn natural_branch(params: &ModelParams) -> Option<SpBranch> {
    match (lambda_is_zero(params), kappa_is_zero(params)) {
        (true, true) => None,
        (false, true) => Some(SpBranch::DegLambda),
        (true, false) => Some(SpBranch::DegKappa),
        (false, false) if params.lambda() * params.kappa() > 0.0 => Some(SpBranch::X),
        (false, false) => Some(SpBranch::P),
    }
}

/// Whether the sign pattern of the couplings allows `branch` to be a minimum.
fn admits(params: &ModelParams, branch: SpBranch) -> bool {
    let (lz, kz) = (lambda_is_zero(params), kappa_is_zero(params));
    match branch {
        SpBranch::X => !lz && !kz && params.lambda() * params.kappa() > 0.0,
        SpBranch::P => !lz && !kz && params.lambda() * params.kappa() < 0.0,
        SpBranch::DegLambda => kz && !lz,
        SpBranch::DegKappa => lz && !kz,
    }
}

/// `zeta_+` realised on a branch.
pub fn branch_zeta(params: &ModelParams, branch: SpBranch) -> f64 {
    match branch {
        SpBranch::X => (params.lambda() + params.kappa()).abs(),
        SpBranch::P => (params.lambda() - params.kappa()).abs(),
        SpBranch::DegLambda => params.lambda().abs(),
        SpBranch::DegKappa => params.kappa().abs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalData {
    /// `t`, absent on the `lambda = 0` line.
    pub t: Option<f64>,
    /// `sqrt(omega Omega) / |1 + t|`; absent when `t` is undefined or `t = -1`.
    pub lambda_c_x: Option<f64>,
    /// `sqrt(omega Omega) / |1 - t|`; absent when `t` is undefined or `t = 1`.
    pub lambda_c_p: Option<f64>,
    /// `sqrt(omega Omega)`, the threshold on the `lambda = 0` line.
    pub kappa_c: f64,
    /// Width of the coexistence band for `t < -1`.
    pub delta_l: Option<f64>,
    /// Width of the coexistence band for `-1 < t < 0`.
    pub delta_u: Option<f64>,
    /// Width divided by `lambda_c_p`.
    pub delta: Option<f64>,
}

impl CriticalData {
    fn t_for_width(&self) -> Result<f64> {
        match self.t {
            Some(t) if t < 0.0 && t != -1.0 => Ok(t),
            Some(t) => Err(Error::UndefinedAtT(t)),
            None => Err(Error::UndefinedAtT(f64::NAN)),
        }
    }

    /// Width of the `|lambda|` interval on which the normal phase and a `p` branch
    /// are both stable.
    pub fn coexistence_width(&self) -> Result<f64> {
        self.t_for_width()?;
        Ok(self.delta_l.or(self.delta_u).expect("width set for t < 0, t != -1"))
    }

    /// `[lambda_c_p, lambda_c_x]` in `|lambda|`.
    pub fn coexistence_interval(&self) -> Result<(f64, f64)> {
        self.t_for_width()?;
        Ok((self.lambda_c_p.unwrap(), self.lambda_c_x.unwrap()))
    }

    pub fn delta(&self) -> Result<f64> {
        self.t_for_width()?;
        Ok(self.delta.unwrap())
    }
}

pub fn critical_couplings(params: &ModelParams) -> Result<CriticalData> {
    require_u0(params)?;
    let s = params.critical_scale();
    let t = params.ratio();
    let lambda_c_x = t.filter(|&t| t != -1.0).map(|t| s / (1.0 + t).abs());
    let lambda_c_p = t.filter(|&t| t != 1.0).map(|t| s / (1.0 - t).abs());
    let (mut delta_l, mut delta_u, mut delta) = (None, None, None);
    if let Some(t) = t {
        if t < -1.0 {
            delta_l = Some(2.0 * s / (t * t - 1.0));
            delta = Some(-2.0 / (1.0 + t));
        } else if t > -1.0 && t < 0.0 {
            delta_u = Some(2.0 * t * s / (t * t - 1.0));
            delta = Some(-2.0 * t / (1.0 + t));
        }
    }
    Ok(CriticalData { t, lambda_c_x, lambda_c_p, kappa_c: s, delta_l, delta_u, delta })
}

/// Whether the branch exists at all: sign pattern admitted and
/// `zeta_+^2 >= omega Omega`.
fn branch_exists(params: &ModelParams, branch: SpBranch) -> bool {
    admits(params, branch)
        && branch_zeta(params, branch) >= params.critical_scale() * (1.0 - BOUNDARY_RTOL)
}

/// Amplitudes `(rho, mu)` of the superradiant solution with effective coupling `zeta`.
pub fn sp_amplitudes(params: &ModelParams, zeta: f64) -> (f64, f64) {
    let q = params.omega() * params.big_omega() / (zeta * zeta);
    let mu2 = (0.5 * (1.0 - q)).max(0.0);
    let mu = mu2.sqrt();
    let rho = zeta * mu * (1.0 - mu2).sqrt() / params.omega();
    (rho, mu)
}

/// The `[theta, eta]` pairs of the discrete branches, in tabulated order.
fn discrete_angles(params: &ModelParams, branch: SpBranch) -> [(f64, f64); 2] {
    let lambda_pos = params.lambda() > 0.0;
    match (branch, lambda_pos) {
        (SpBranch::X, true) => [(0.0, 0.0), (PI, PI)],
        (SpBranch::X, false) => [(0.0, PI), (PI, 0.0)],
        (SpBranch::P, true) => [(HALF_PI, HALF_PI), (3.0 * HALF_PI, 3.0 * HALF_PI)],
        (SpBranch::P, false) => [(HALF_PI, 3.0 * HALF_PI), (3.0 * HALF_PI, HALF_PI)],
        _ => unreachable!("continuum branches have no discrete angles"),
    }
}

/// `eta` on a continuum branch as a function of the free angle `theta`.
pub fn family_eta(params: &ModelParams, branch: SpBranch, theta: f64) -> f64 {
    match branch {
        SpBranch::DegLambda if params.lambda() > 0.0 => theta,
        SpBranch::DegLambda => theta + PI,
        SpBranch::DegKappa if params.kappa() > 0.0 => -theta,
        SpBranch::DegKappa => PI - theta,
        _ => unreachable!("discrete branches have no family"),
    }
}

/// Stationary superradiant minima of a branch. Discrete branches give the two
/// tabulated representatives; continuum branches give `samples` points with
/// `theta_k = 2 pi k / samples`. Empty when the branch does not exist.
pub fn sp_solutions(
    params: &ModelParams,
    branch: SpBranch,
    samples: usize,
) -> Result<Vec<MeanFieldState>> {
    require_u0(params)?;
    if !branch_exists(params, branch) {
        return Ok(Vec::new());
    }
    let (rho, mu) = sp_amplitudes(params, branch_zeta(params, branch));
    let states = match branch {
        SpBranch::X | SpBranch::P => discrete_angles(params, branch)
            .iter()
            .map(|&(theta, eta)| MeanFieldState::new(rho, mu, theta, eta))
            .collect::<Result<Vec<_>>>()?,
        SpBranch::DegLambda | SpBranch::DegKappa => (0..samples)
            .map(|k| {
                let theta = TAU * k as f64 / samples as f64;
                MeanFieldState::new(rho, mu, theta, family_eta(params, branch, theta))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(states)
}

/// `|lambda + kappa| <= sqrt(omega Omega)`.
pub fn np_stable(params: &ModelParams) -> Result<bool> {
    require_u0(params)?;
    let s = params.critical_scale();
    Ok((params.lambda() + params.kappa()).abs() <= s * (1.0 + BOUNDARY_RTOL))
}

/// `zeta_+ >= sqrt(omega Omega)` on a branch whose sign constraints hold.
pub fn sp_stable(params: &ModelParams, branch: SpBranch) -> Result<bool> {
    require_u0(params)?;
    Ok(branch_exists(params, branch))
}

/// Strictly past threshold, so the superradiant state differs from the origin.
pub fn sp_condensed(params: &ModelParams, branch: SpBranch) -> bool {
    admits(params, branch)
        && branch_zeta(params, branch) > params.critical_scale() * (1.0 + BOUNDARY_RTOL)
}

/// Hessian eigenvalues at the superradiant solution of a branch:
/// `m_{1,2} = omega + 2 zeta^4 / [omega (zeta^2 + omega Omega)] -+ sqrt(R)` and
/// `m_{3,4} = (zeta / omega)(1 - omega^2 Omega^2 / zeta^4) * (|lambda|, |kappa|)`.
pub fn sp_hessian_eigenvalues(params: &ModelParams, branch: SpBranch) -> Result<[f64; 4]> {
    require_u0(params)?;
    if !branch_exists(params, branch) {
        return Err(Error::EmptyBranch);
    }
    let (w, big_w) = (params.omega(), params.big_omega());
    let z = branch_zeta(params, branch);
    let z2 = z * z;
    let z4 = z2 * z2;
    let ww = w * big_w;
    let r = w * w + (8.0 * ww * ww - 4.0 * z4) / (ww + z2) + 4.0 * z4 * z4 / (w * w * (ww + z2).powi(2));
    let centre = w + 2.0 * z4 / (w * (z2 + ww));
    let root = r.max(0.0).sqrt();
    let phase = z / w * (1.0 - ww * ww / z4);
    // on the continuum branches the phase direction along the family is flat
    let (m3, m4) = match branch {
        SpBranch::DegLambda => (phase * params.lambda().abs(), 0.0),
        SpBranch::DegKappa => (0.0, phase * params.kappa().abs()),
        _ => (phase * params.lambda().abs(), phase * params.kappa().abs()),
    };
    Ok([centre - root, centre + root, m3, m4])
}

/// `-(zeta^4 + omega^2 Omega^2) / (4 omega zeta^2)`.
pub fn sp_ground_energy(params: &ModelParams, branch: SpBranch) -> Result<f64> {
    require_u0(params)?;
    if !branch_exists(params, branch) {
        return Err(Error::EmptyBranch);
    }
    let z2 = branch_zeta(params, branch).powi(2);
    let ww = params.omega() * params.big_omega();
    Ok(-(z2 * z2 + ww * ww) / (4.0 * params.omega() * z2))
}

/// Lowest energy among the normal phase and every existing branch.
pub fn analytic_ground_energy(params: &ModelParams) -> Result<f64> {
    require_u0(params)?;
    let mut best = -0.5 * params.big_omega();
    for branch in [SpBranch::X, SpBranch::P, SpBranch::DegLambda, SpBranch::DegKappa] {
        if let Ok(e) = sp_ground_energy(params, branch) {
            best = best.min(e);
        }
    }
    Ok(best)
}

/// Which of the two tabulated representatives to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BranchSign {
    /// The first `[theta, eta]` pair of the table row.
    Upper,
    /// The second pair.
    Lower,
}

/// Tabulated order parameters of the normal phase and the four discrete phases,
/// written in terms of `t` and `lambda_c`.
pub fn table1_order_parameters(
    params: &ModelParams,
    phase: PhaseLabel,
    sign: BranchSign,
) -> Result<OrderParameters> {
    require_u0(params)?;
    let mismatch = |reason: &str| Error::PhaseMismatch {
        phase: phase.to_string(),
        reason: reason.to_string(),
    };
    if phase == PhaseLabel::NP {
        return Ok(OrderParameters::normal());
    }
    let (branch, sp_sign) = match phase {
        PhaseLabel::X_SP => (SpBranch::X, true),
        PhaseLabel::X_RSP => (SpBranch::X, false),
        PhaseLabel::P_SP => (SpBranch::P, true),
        PhaseLabel::P_RSP => (SpBranch::P, false),
        _ => return Err(mismatch("no tabulated row")),
    };
    if !admits(params, branch) || (params.lambda() > 0.0) != sp_sign {
        return Err(mismatch("coupling signs select a different phase"));
    }
    let t = params.ratio().ok_or_else(|| mismatch("t undefined"))?;
    let crit = critical_couplings(params)?;
    let (factor, lambda_c) = match branch {
        SpBranch::X => (1.0 + t, crit.lambda_c_x),
        _ => (1.0 - t, crit.lambda_c_p),
    };
    let lambda_c = lambda_c.ok_or_else(|| mismatch("critical coupling undefined"))?;
    let lambda = params.lambda();
    let ratio2 = (lambda_c / lambda).powi(2);
    if ratio2 > 1.0 + BOUNDARY_RTOL {
        return Err(mismatch("coupling below the critical point"));
    }
    let depletion = (1.0 - ratio2 * ratio2).max(0.0);
    let dipole = 0.5 * depletion.sqrt();
    // first listed pair of each row gives the first sign
    let first = match phase {
        PhaseLabel::X_SP => dipole,
        PhaseLabel::X_RSP => -dipole,
        PhaseLabel::P_SP => -dipole,
        _ => dipole,
    };
    let signed = if sign == BranchSign::Upper { first } else { -first };
    let (jx, jy) = match branch {
        SpBranch::X => (signed, 0.0),
        _ => (0.0, signed),
    };
    Ok(OrderParameters {
        n_photon: factor * factor * lambda * lambda / (4.0 * params.omega().powi(2)) * depletion,
        jz: -0.5 * ratio2,
        jx,
        jy,
    })
}
