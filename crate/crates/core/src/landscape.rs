//! Scaled ground-state energy per atom, its stationarity equations and the
//! block-diagonal Hessian used to classify stationary points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{state_zeta_pm, MeanFieldState, ModelParams, MU_MAX};

/// Scaled energy
/// `E = omega rho^2 + (Omega + U rho^2)(mu^2 - 1/2) - 2 rho mu C zeta_+`.
pub fn scaled_energy(params: &ModelParams, state: &MeanFieldState) -> f64 {
    let (zeta_plus, _) = state_zeta_pm(params, state);
    let rho2 = state.rho() * state.rho();
    let mu = state.mu();
    params.omega() * rho2 + (params.big_omega() + params.u() * rho2) * (mu * mu - 0.5)
        - 2.0 * state.rho() * mu * state.c_factor() * zeta_plus
}

/// Left-hand sides of the four stationarity equations, in the form they are
/// usually written (each is a rescaled partial derivative of the energy).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub rho: f64,
    pub mu: f64,
    pub theta: f64,
    pub eta: f64,
}

impl Residuals {
    pub fn max_abs(&self) -> f64 {
        self.rho.abs().max(self.mu.abs()).max(self.theta.abs()).max(self.eta.abs())
    }

    /// The energy gradient `(dE/drho, dE/dmu, dE/dtheta, dE/deta)`.
    ///
    /// The residuals are `dE/d(rho, mu, theta)` divided by 2 and `dE/deta`
    /// divided by -2.
    pub fn gradient(&self) -> [f64; 4] {
        [2.0 * self.rho, 2.0 * self.mu, 2.0 * self.theta, -2.0 * self.eta]
    }
}

fn check_domain(state: &MeanFieldState) -> Result<()> {
    if state.mu() >= MU_MAX {
        Err(Error::Domain { mu: state.mu(), limit: MU_MAX })
    } else {
        Ok(())
    }
}

pub fn equilibrium_residuals(params: &ModelParams, state: &MeanFieldState) -> Result<Residuals> {
    check_domain(state)?;
    let (rho, mu) = (state.rho(), state.mu());
    let c = state.c_factor();
    let (zeta_plus, _) = state_zeta_pm(params, state);
    let (u, omega, big_omega) = (params.u(), params.omega(), params.big_omega());
    let diff = state.theta() - state.eta();
    let sum = state.theta() + state.eta();
    let co = params.lambda() * diff.sin();
    let counter = params.kappa() * sum.sin();
    let amp = rho * mu * c;
    Ok(Residuals {
        rho: omega * rho + u * rho * (mu * mu - 0.5) - mu * c * zeta_plus,
        mu: (big_omega + u * rho * rho) * mu - rho * (1.0 - 2.0 * mu * mu) / c * zeta_plus,
        theta: amp * (co + counter),
        eta: amp * (co - counter),
    })
}

/// `dE/d(rho, mu, theta, eta)`.
pub fn energy_gradient(params: &ModelParams, state: &MeanFieldState) -> Result<[f64; 4]> {
    Ok(equilibrium_residuals(params, state)?.gradient())
}

pub type Block = [[f64; 2]; 2];

/// The two 2x2 blocks of the Hessian in `(rho, mu)` and `(theta, eta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianBlocks {
    pub amplitude: Block,
    pub phase: Block,
}

impl HessianBlocks {
    pub fn full(&self) -> [[f64; 4]; 4] {
        let mut m = [[0.0; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = self.amplitude[i][j];
                m[i + 2][j + 2] = self.phase[i][j];
            }
        }
        m
    }
}

pub fn hessian(params: &ModelParams, state: &MeanFieldState) -> Result<HessianBlocks> {
    check_domain(state)?;
    let (rho, mu) = (state.rho(), state.mu());
    let c = state.c_factor();
    let (zp, zm) = state_zeta_pm(params, state);
    let u = params.u();
    let mu2 = mu * mu;

    let m11 = 2.0 * params.omega() + 2.0 * u * (mu2 - 0.5);
    let m22 = 2.0 * params.big_omega()
        + 2.0 * u * rho * rho
        + 2.0 * rho * mu * (3.0 - 2.0 * mu2) / (c * c * c) * zp;
    let m12 = 4.0 * u * rho * mu - 2.0 * (1.0 - 2.0 * mu2) / c * zp;
    let m_prime = 2.0 * rho * mu * c;

    Ok(HessianBlocks {
        amplitude: [[m11, m12], [m12, m22]],
        phase: [[m_prime * zp, -m_prime * zm], [-m_prime * zm, m_prime * zp]],
    })
}

/// Closed-form eigenvalues `(m1, m2, m3, m4)`: `m1 <= m2` from the amplitude block,
/// `m3 = 2 lambda M' cos(theta - eta)` and `m4 = 2 kappa M' cos(theta + eta)` from
/// the phase block.
pub fn hessian_eigenvalues(params: &ModelParams, state: &MeanFieldState) -> Result<[f64; 4]> {
    let blocks = hessian(params, state)?;
    let [[m11, m12], [_, m22]] = blocks.amplitude;
    let disc = ((m11 - m22).powi(2) + 4.0 * m12 * m12).sqrt();
    let m_prime = 2.0 * state.rho() * state.mu() * state.c_factor();
    let (co, counter) = match state.sector() {
        crate::model::Sector::Coherent => (
            params.lambda() * (state.theta() - state.eta()).cos(),
            params.kappa() * (state.theta() + state.eta()).cos(),
        ),
        crate::model::Sector::Degenerate => (params.lambda(), params.kappa()),
    };
    Ok([
        0.5 * (m11 + m22 - disc),
        0.5 * (m11 + m22 + disc),
        2.0 * m_prime * co,
        2.0 * m_prime * counter,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityClass {
    StableMinimum,
    Saddle,
    Maximum,
    Marginal,
}

impl StabilityClass {
    pub fn is_locally_stable(&self) -> bool {
        matches!(self, StabilityClass::StableMinimum | StabilityClass::Marginal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub eigenvalues: [f64; 4],
    pub class: StabilityClass,
    /// Set when only the amplitude block was used (normal phase, where the phase
    /// differences are undefined and `m3 = m4 = 0` carry no information).
    pub rank_reduced: bool,
}

/// Eigenvalues with magnitude below this count as zero.
pub fn marginal_tolerance(params: &ModelParams) -> f64 {
    1e-8 * (params.omega() + params.big_omega()).max(1.0)
}

/// Classify a stationary point by the signs of the Hessian eigenvalues.
///
/// With `at_np` set only `m1, m2` participate.
pub fn classify_stability(
    params: &ModelParams,
    state: &MeanFieldState,
    at_np: bool,
) -> Result<StabilityReport> {
    let eigenvalues = hessian_eigenvalues(params, state)?;
    let considered = if at_np { &eigenvalues[..2] } else { &eigenvalues[..] };
    let tol = marginal_tolerance(params);
    let positive = considered.iter().filter(|&&m| m > tol).count();
    let negative = considered.iter().filter(|&&m| m < -tol).count();
    let class = if positive == considered.len() {
        StabilityClass::StableMinimum
    } else if negative == considered.len() {
        StabilityClass::Maximum
    } else if negative > 0 {
        StabilityClass::Saddle
    } else {
        StabilityClass::Marginal
    };
    Ok(StabilityReport { eigenvalues, class, rank_reduced: at_np })
}
