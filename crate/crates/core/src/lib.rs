//! Ground-state atlas of the imbalanced Dicke model.
//!
//! Mean-field energy landscape and its Hessian, closed-form `U = 0` solutions,
//! a deterministic variational oracle, phase classification and sweeps,
//! symmetry checks on mean-field data, and finite-`N` exact diagonalization.

pub mod analytic;
pub mod classifier;
pub mod error;
pub mod exact;
pub mod landscape;
pub mod model;
pub mod oracle;
pub mod symmetry;

pub use error::{Error, Result};
pub use model::{MeanFieldState, ModelParams, OrderParameters, PhaseLabel};
