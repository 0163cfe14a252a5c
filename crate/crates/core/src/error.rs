use thiserror::Error;

use crate::model::MeanFieldState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// `mu` reached the cap where `sqrt(1 - mu^2)` makes the stationarity equations singular.
    #[error("mu = {mu} is outside the differentiable domain (mu < {limit})")]
    Domain { mu: f64, limit: f64 },

    #[error("closed forms require U = 0 (got U = {0})")]
    UnsupportedU(f64),

    #[error("quantity undefined at t = {0}")]
    UndefinedAtT(f64),

    #[error("parameters cannot host phase {phase}: {reason}")]
    PhaseMismatch { phase: String, reason: String },

    #[error("branch has no superradiant solution (zeta+^2 < omega*Omega)")]
    EmptyBranch,

    #[error("refinement did not converge after {iterations} sweeps (max residual {residual:e})")]
    Convergence {
        best: MeanFieldState,
        energy: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("axis error: {0}")]
    Axis(String),

    #[error("oracle verification failed at cell {cell}: {detail}")]
    Verification { cell: usize, detail: String },

    #[error("Hilbert space dimension {dim} exceeds the limit {limit}")]
    Dimension { dim: usize, limit: usize },

    #[error("eigensolver did not converge: {0}")]
    Eigensolver(String),
}
