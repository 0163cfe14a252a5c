//! Parameter and state records for the coherent-state ansatz.
//!
//! The cavity amplitude is `alpha = rho e^{i theta}` and the Holstein-Primakoff
//! boson amplitude is `gamma = mu e^{i eta}`. Everything here is an immutable
//! value type.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on `mu`. At `mu = 1` the factor `sqrt(1 - mu^2)` vanishes and the
/// `mu` stationarity equation divides by zero.
pub const MU_MAX: f64 = 0.999;

/// Below this value of `rho * mu` the ansatz is treated as the normal-phase branch
/// where the phase differences are undetermined.
pub const DEGENERATE_RHO_MU: f64 = 1e-14;

/// Angles this close to `2 pi` are folded back onto zero.
const ANGLE_WRAP_EPS: f64 = 1e-12;

/// Map an angle onto `[0, 2 pi)`.
pub fn canonical_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if TAU - r < ANGLE_WRAP_EPS {
        0.0
    } else {
        r
    }
}

/// Shortest distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Hamiltonian parameters `(omega, Omega, lambda, kappa, U)`, with `hbar = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    omega: f64,
    big_omega: f64,
    lambda: f64,
    kappa: f64,
    u: f64,
}

impl ModelParams {
    /// `omega` is the cavity frequency, `big_omega` the atomic splitting, `lambda`
    /// and `kappa` the co- and counter-rotating couplings, `u` the nonlinear
    /// atom-field interaction.
    pub fn new(omega: f64, big_omega: f64, lambda: f64, kappa: f64, u: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParams(format!("omega must be positive, got {omega}")));
        }
        if !(big_omega.is_finite() && big_omega > 0.0) {
            return Err(Error::InvalidParams(format!("Omega must be positive, got {big_omega}")));
        }
        for (name, v) in [("lambda", lambda), ("kappa", kappa), ("U", u)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(Self { omega, big_omega, lambda, kappa, u })
    }

    /// Parameters with `kappa = t * lambda` and `U = 0`.
    pub fn with_ratio(omega: f64, big_omega: f64, lambda: f64, t: f64) -> Result<Self> {
        Self::new(omega, big_omega, lambda, t * lambda, 0.0)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn big_omega(&self) -> f64 {
        self.big_omega
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    /// `t = kappa / lambda`; `None` on the `lambda = 0` line where it is undefined.
    pub fn ratio(&self) -> Option<f64> {
        if self.lambda == 0.0 {
            None
        } else {
            Some(self.kappa / self.lambda)
        }
    }

    /// `sqrt(omega * Omega)`, the scale of every critical coupling.
    pub fn critical_scale(&self) -> f64 {
        (self.omega * self.big_omega).sqrt()
    }

    pub fn with_couplings(&self, lambda: f64, kappa: f64) -> Result<Self> {
        Self::new(self.omega, self.big_omega, lambda, kappa, self.u)
    }

    pub fn with_u(&self, u: f64) -> Result<Self> {
        Self::new(self.omega, self.big_omega, self.lambda, self.kappa, u)
    }

    pub fn with_big_omega(&self, big_omega: f64) -> Result<Self> {
        Self::new(self.omega, big_omega, self.lambda, self.kappa, self.u)
    }
}

/// Variational point `(rho, mu, theta, eta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    rho: f64,
    mu: f64,
    theta: f64,
    eta: f64,
}

impl MeanFieldState {
    pub fn new(rho: f64, mu: f64, theta: f64, eta: f64) -> Result<Self> {
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(Error::InvalidState(format!("rho must be >= 0, got {rho}")));
        }
        if !(mu.is_finite() && (0.0..=MU_MAX).contains(&mu)) {
            return Err(Error::InvalidState(format!("mu must lie in [0, {MU_MAX}], got {mu}")));
        }
        if !(theta.is_finite() && eta.is_finite()) {
            return Err(Error::InvalidState("angles must be finite".into()));
        }
        Ok(Self { rho, mu, theta: canonical_angle(theta), eta: canonical_angle(eta) })
    }

    /// The normal-phase origin `rho = mu = 0`.
    pub fn origin() -> Self {
        Self { rho: 0.0, mu: 0.0, theta: 0.0, eta: 0.0 }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(self.rho, self.theta)
    }

    pub fn gamma(&self) -> Complex64 {
        Complex64::from_polar(self.mu, self.eta)
    }

    /// `C = sqrt(1 - mu^2)`.
    pub fn c_factor(&self) -> f64 {
        (1.0 - self.mu * self.mu).sqrt()
    }

    pub fn sector(&self) -> Sector {
        if self.rho * self.mu < DEGENERATE_RHO_MU {
            Sector::Degenerate
        } else {
            Sector::Coherent
        }
    }

    pub fn with_angles(&self, theta: f64, eta: f64) -> Self {
        Self { theta: canonical_angle(theta), eta: canonical_angle(eta), ..*self }
    }

    /// Same point up to the tolerances, ignoring angles that carry no information
    /// (`theta` when `rho = 0`, `eta` when `mu = 0`).
    pub fn approx_eq(&self, other: &Self, amp_tol: f64, angle_tol: f64) -> bool {
        if (self.rho - other.rho).abs() > amp_tol || (self.mu - other.mu).abs() > amp_tol {
            return false;
        }
        let theta_matters = self.rho.max(other.rho) > amp_tol;
        let eta_matters = self.mu.max(other.mu) > amp_tol;
        (!theta_matters || angle_distance(self.theta, other.theta) <= angle_tol)
            && (!eta_matters || angle_distance(self.eta, other.eta) <= angle_tol)
    }
}

/// Which branch of `zeta_pm` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    /// `rho * mu != 0`: the angle-dependent form.
    Coherent,
    /// `rho * mu = 0`: `lambda +- kappa`, angles ignored.
    Degenerate,
}

/// Effective couplings `zeta_+ = lambda cos(theta - eta) + kappa cos(theta + eta)` and
/// `zeta_- = lambda cos(theta - eta) - kappa cos(theta + eta)`.
pub fn zeta_pm(theta: f64, eta: f64, lambda: f64, kappa: f64, sector: Sector) -> (f64, f64) {
    match sector {
        Sector::Coherent => {
            let co = lambda * (theta - eta).cos();
            let counter = kappa * (theta + eta).cos();
            (co + counter, co - counter)
        }
        Sector::Degenerate => (lambda + kappa, lambda - kappa),
    }
}

/// `zeta_pm` evaluated at a state, dispatching on its sector.
pub fn state_zeta_pm(params: &ModelParams, state: &MeanFieldState) -> (f64, f64) {
    zeta_pm(state.theta, state.eta, params.lambda, params.kappa, state.sector())
}

/// Per-atom order parameters of a mean-field state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderParameters {
    /// `<a^dagger a> / N`
    pub n_photon: f64,
    /// `<J_z> / N`
    pub jz: f64,
    /// `<J_x> / N`
    pub jx: f64,
    /// `<J_y> / N`
    pub jy: f64,
}

impl OrderParameters {
    pub fn normal() -> Self {
        Self { n_photon: 0.0, jz: -0.5, jx: 0.0, jy: 0.0 }
    }
}

pub fn order_parameters(state: &MeanFieldState) -> OrderParameters {
    let c = state.c_factor();
    let mu = state.mu;
    OrderParameters {
        n_photon: state.rho * state.rho,
        jz: mu * mu - 0.5,
        jx: c * mu * state.eta.cos(),
        jy: -c * mu * state.eta.sin(),
    }
}

/// Position-momentum coordinates of both modes in units of `sqrt(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadratures {
    pub xa: f64,
    pub pa: f64,
    pub xc: f64,
    pub pc: f64,
}

pub fn quadratures(state: &MeanFieldState) -> Quadratures {
    let (sa, ca) = state.theta.sin_cos();
    let (sc, cc) = state.eta.sin_cos();
    Quadratures {
        xa: state.rho * ca,
        pa: state.rho * sa,
        xc: state.mu * cc,
        pc: state.mu * sc,
    }
}

/// One-parameter families of equal-energy phase differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AngleFamily {
    /// `theta - eta` fixed (the `kappa = 0` line).
    CoRotating,
    /// `theta + eta` fixed (the `lambda = 0` line).
    CounterRotating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum PhaseLabel {
    NP,
    X_SP,
    X_RSP,
    P_SP,
    P_RSP,
    SP0,
    RSP0,
    SPX,
    SPP,
    COEX_PSP_NP,
    COEX_PRSP_NP,
    UNSTABLE,
}

impl PhaseLabel {
    pub const ALL: [PhaseLabel; 12] = [
        PhaseLabel::NP,
        PhaseLabel::X_SP,
        PhaseLabel::X_RSP,
        PhaseLabel::P_SP,
        PhaseLabel::P_RSP,
        PhaseLabel::SP0,
        PhaseLabel::RSP0,
        PhaseLabel::SPX,
        PhaseLabel::SPP,
        PhaseLabel::COEX_PSP_NP,
        PhaseLabel::COEX_PRSP_NP,
        PhaseLabel::UNSTABLE,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseLabel::NP => "NP",
            PhaseLabel::X_SP => "X_SP",
            PhaseLabel::X_RSP => "X_RSP",
            PhaseLabel::P_SP => "P_SP",
            PhaseLabel::P_RSP => "P_RSP",
            PhaseLabel::SP0 => "SP0",
            PhaseLabel::RSP0 => "RSP0",
            PhaseLabel::SPX => "SPX",
            PhaseLabel::SPP => "SPP",
            PhaseLabel::COEX_PSP_NP => "COEX_PSP_NP",
            PhaseLabel::COEX_PRSP_NP => "COEX_PRSP_NP",
            PhaseLabel::UNSTABLE => "UNSTABLE",
        }
    }

    /// The superradiant phase realised by the global minimum; coexistence labels
    /// collapse onto their SP component.
    pub fn ground_phase(&self) -> PhaseLabel {
        match self {
            PhaseLabel::COEX_PSP_NP => PhaseLabel::P_SP,
            PhaseLabel::COEX_PRSP_NP => PhaseLabel::P_RSP,
            other => *other,
        }
    }

    pub fn is_coexistence(&self) -> bool {
        matches!(self, PhaseLabel::COEX_PSP_NP | PhaseLabel::COEX_PRSP_NP)
    }

    /// Phases whose minimizers form a continuous U(1) manifold.
    pub fn is_continuum(&self) -> bool {
        matches!(self, PhaseLabel::SP0 | PhaseLabel::RSP0 | PhaseLabel::SPX | PhaseLabel::SPP)
    }

    pub fn is_superradiant(&self) -> bool {
        !matches!(self, PhaseLabel::NP | PhaseLabel::UNSTABLE)
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PhaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PhaseLabel::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown phase label {s}")))
    }
}

/// `pi / 2`, used for the `p`-type phase differences.
pub const HALF_PI: f64 = PI / 2.0;

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn params_reject_nonpositive_frequencies() {
        assert!(ModelParams::new(0.0, 1.0, 0.1, 0.1, 0.0).is_err());
        assert!(ModelParams::new(1.0, -1.0, 0.1, 0.1, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, f64::NAN, 0.1, 0.0).is_err());
    }

    #[test]
    fn ratio_is_undefined_on_lambda_zero_line() {
        let p = ModelParams::new(1.0, 1.0, 0.0, 0.7, 0.0).unwrap();
        assert_eq!(p.ratio(), None);
        let p = ModelParams::new(1.0, 1.0, 2.0, -1.0, 0.0).unwrap();
        assert_eq!(p.ratio(), Some(-0.5));
    }

    #[test]
    fn state_rejects_out_of_domain() {
        assert!(MeanFieldState::new(-0.1, 0.2, 0.0, 0.0).is_err());
        assert!(MeanFieldState::new(0.1, 1.0, 0.0, 0.0).is_err());
        let s = MeanFieldState::new(0.1, 0.2, -0.3, 7.0).unwrap();
        assert!((s.theta() - (TAU - 0.3)).abs() < TOL);
        assert!((s.eta() - (7.0 - TAU)).abs() < TOL);
    }

    #[test]
    fn zeta_examples() {
        let (zp, zm) = zeta_pm(0.0, 0.0, 0.3, 0.1, Sector::Coherent);
        assert!((zp - 0.4).abs() < TOL && (zm - 0.2).abs() < TOL);

        let (zp, zm) = zeta_pm(HALF_PI, HALF_PI, 1.0, 1.0, Sector::Coherent);
        assert!(zp.abs() < TOL && (zm - 2.0).abs() < TOL);

        let (zp, zm) = zeta_pm(1.234, 5.0, 1.0, -0.5, Sector::Degenerate);
        assert_eq!((zp, zm), (0.5, 1.5));
    }

    #[test]
    fn order_parameter_examples() {
        assert_eq!(order_parameters(&MeanFieldState::origin()), OrderParameters::normal());

        let s = MeanFieldState::new(0.968246, 0.612372, 0.0, 0.0).unwrap();
        let op = order_parameters(&s);
        assert!((op.n_photon - 0.9375).abs() < 1e-6);
        assert!((op.jz + 0.125).abs() < 1e-6);
        assert!((op.jx - 0.484123).abs() < 1e-6);
        assert!(op.jy.abs() < TOL);

        let s = MeanFieldState::new(1.0, 0.5, HALF_PI, HALF_PI).unwrap();
        let op = order_parameters(&s);
        assert!((op.jy + 0.75f64.sqrt() * 0.5).abs() < TOL);
        assert!(op.jx.abs() < TOL);
    }

    #[test]
    fn quadrature_examples() {
        let q = quadratures(&MeanFieldState::new(1.0, 0.5, 0.0, PI).unwrap());
        assert!((q.xa - 1.0).abs() < TOL && q.pa.abs() < TOL);
        assert!((q.xc + 0.5).abs() < TOL && q.pc.abs() < TOL);

        let q = quadratures(&MeanFieldState::origin());
        assert_eq!((q.xa, q.pa, q.xc, q.pc), (0.0, 0.0, 0.0, 0.0));

        let r = 0.5f64.sqrt();
        let q = quadratures(&MeanFieldState::new(1.0, r, HALF_PI, 3.0 * HALF_PI).unwrap());
        assert!(q.xa.abs() < TOL && (q.pa - 1.0).abs() < TOL);
        assert!(q.xc.abs() < TOL && (q.pc + r).abs() < TOL);
    }

    #[test]
    fn labels_round_trip_through_strings() {
        for l in PhaseLabel::ALL {
            assert_eq!(l.as_str().parse::<PhaseLabel>().unwrap(), l);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn state() -> impl Strategy<Value = MeanFieldState> {
            (0.0..5.0f64, 0.0..MU_MAX, 0.0..TAU, 0.0..TAU)
                .prop_map(|(r, m, t, e)| MeanFieldState::new(r, m, t, e).unwrap())
        }

        proptest! {
            #[test]
            fn zeta_is_2pi_periodic(t in -10.0..10.0f64, e in -10.0..10.0f64,
                                    l in -3.0..3.0f64, k in -3.0..3.0f64) {
                let a = zeta_pm(t, e, l, k, Sector::Coherent);
                let b = zeta_pm(t + TAU, e + TAU, l, k, Sector::Coherent);
                prop_assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
            }

            #[test]
            fn dipole_magnitude_identity(s in state()) {
                let op = order_parameters(&s);
                let lhs = op.jx * op.jx + op.jy * op.jy;
                let rhs = s.mu() * s.mu() * (1.0 - s.mu() * s.mu());
                prop_assert!((lhs - rhs).abs() < 1e-12);
                prop_assert!(lhs + op.jz * op.jz <= 0.25 + 1e-12);
                prop_assert!(op.n_photon >= 0.0 && (-0.5..=0.5).contains(&op.jz));
            }

            #[test]
            fn zero_mu_has_no_dipole(r in 0.0..5.0f64, t in 0.0..TAU, e in 0.0..TAU) {
                let op = order_parameters(&MeanFieldState::new(r, 0.0, t, e).unwrap());
                prop_assert!(op.jx == 0.0 && op.jy == 0.0);
            }

            #[test]
            fn quadratures_recover_theta(s in state()) {
                prop_assume!(s.rho() > 1e-6);
                let q = quadratures(&s);
                prop_assert!(angle_distance(q.pa.atan2(q.xa), s.theta()) < 1e-9);
            }
        }
    }
}
