//! Deterministic brute-force minimizer of the scaled energy over
//! `(rho, mu, theta, eta)`: a coarse grid scan, local refinement of every grid
//! minimum near the best cell, then deduplication.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::{equilibrium_residuals, scaled_energy};
use crate::model::{AngleFamily, MeanFieldState, ModelParams, MU_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub rho_max: f64,
    pub mu_max: f64,
    pub n_rho: usize,
    pub n_mu: usize,
    pub n_theta: usize,
    pub n_eta: usize,
    /// Target for the largest equilibrium residual.
    pub refine_tol: f64,
    /// Relative energy tolerance for calling two minima degenerate.
    pub degeneracy_rtol: f64,
    /// Angles closer than this are the same minimizer.
    pub angle_tol: f64,
    /// Amplitudes closer than this are the same minimizer.
    pub amp_tol: f64,
    /// Relative energy window above the best grid cell in which grid minima are kept.
    pub energy_window: f64,
    /// Upper bound on refined candidates.
    pub max_candidates: usize,
    /// Budget of refinement iterations per candidate.
    pub max_iterations: usize,
    /// Representatives emitted for a continuous manifold of minima.
    pub manifold_samples: usize,
}

impl SearchSpec {
    /// Box sized from the couplings: superradiant amplitudes scale as `zeta_+ / omega`.
    pub fn default_for(params: &ModelParams) -> Self {
        let zeta_max = params.lambda().abs() + params.kappa().abs();
        Self {
            rho_max: (3.0 * zeta_max / params.omega()).max(2.0),
            mu_max: 0.95,
            n_rho: 48,
            n_mu: 48,
            n_theta: 32,
            n_eta: 32,
            refine_tol: 1e-10,
            degeneracy_rtol: 1e-9,
            angle_tol: 1e-4,
            amp_tol: 1e-6,
            energy_window: 0.1,
            max_candidates: 48,
            max_iterations: 100_000,
            manifold_samples: 16,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(format!("search spec: {m}")));
        if !(self.rho_max > 0.0) || !(self.mu_max > 0.0 && self.mu_max <= MU_MAX) {
            return bad("box must satisfy rho_max > 0 and 0 < mu_max <= MU_MAX");
        }
        if self.n_rho < 2 || self.n_mu < 2 || self.n_theta < 1 || self.n_eta < 1 {
            return bad("grid counts too small");
        }
        if !(self.refine_tol > 0.0
            && self.degeneracy_rtol > 0.0
            && self.angle_tol > 0.0
            && self.amp_tol > 0.0
            && self.energy_window > 0.0)
        {
            return bad("tolerances must be positive");
        }
        if self.max_candidates == 0 || self.max_iterations == 0 {
            return bad("candidate and iteration budgets must be positive");
        }
        Ok(())
    }

    pub fn degeneracy_tol(&self, energy: f64) -> f64 {
        self.degeneracy_rtol * energy.abs().max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerSet {
    pub states: Vec<MeanFieldState>,
    pub ground_energy: f64,
    pub degenerate_manifold: bool,
    /// Direction of the flat family when `degenerate_manifold` is set.
    pub family: Option<AngleFamily>,
}

impl MinimizerSet {
    pub fn ground_state(&self) -> &MeanFieldState {
        &self.states[0]
    }

    pub fn is_normal(&self) -> bool {
        self.states.len() == 1 && self.states[0] == MeanFieldState::origin()
    }
}

// Raw landscape with the angle-dependent coupling everywhere. It is smooth
// across rho * mu = 0 and agrees in value with `scaled_energy`.

type Point = [f64; 4];

fn raw_energy(p: &ModelParams, x: &Point) -> f64 {
    let [rho, mu, theta, eta] = *x;
    let zeta = p.lambda() * (theta - eta).cos() + p.kappa() * (theta + eta).cos();
    let c = (1.0 - mu * mu).sqrt();
    p.omega() * rho * rho + (p.big_omega() + p.u() * rho * rho) * (mu * mu - 0.5)
        - 2.0 * rho * mu * c * zeta
}

fn raw_gradient(p: &ModelParams, x: &Point) -> Point {
    let [rho, mu, theta, eta] = *x;
    let (sd, cd) = (theta - eta).sin_cos();
    let (ss, cs) = (theta + eta).sin_cos();
    let zeta = p.lambda() * cd + p.kappa() * cs;
    let c = (1.0 - mu * mu).sqrt();
    let amp = 2.0 * rho * mu * c;
    [
        2.0 * p.omega() * rho + 2.0 * p.u() * rho * (mu * mu - 0.5) - 2.0 * mu * c * zeta,
        2.0 * (p.big_omega() + p.u() * rho * rho) * mu - 2.0 * rho * (1.0 - 2.0 * mu * mu) / c * zeta,
        amp * (p.lambda() * sd + p.kappa() * ss),
        amp * (-p.lambda() * sd + p.kappa() * ss),
    ]
}

fn numeric_hessian(p: &ModelParams, x: &Point) -> Matrix4<f64> {
    const H: f64 = 1e-6;
    let mut m = Matrix4::zeros();
    for j in 0..4 {
        let mut xp = *x;
        let mut xm = *x;
        xp[j] += H;
        xm[j] -= H;
        let gp = raw_gradient(p, &xp);
        let gm = raw_gradient(p, &xm);
        for i in 0..4 {
            m[(i, j)] = (gp[i] - gm[i]) / (2.0 * H);
        }
    }
    (m + m.transpose()) * 0.5
}

fn to_state(x: &Point) -> Result<MeanFieldState> {
    MeanFieldState::new(x[0].max(0.0), x[1].clamp(0.0, MU_MAX), x[2], x[3])
}

fn residual(p: &ModelParams, x: &Point) -> f64 {
    match to_state(x).and_then(|s| equilibrium_residuals(p, &s)) {
        Ok(r) => r.max_abs(),
        Err(_) => f64::INFINITY,
    }
}

/// Interior cap on `mu` during refinement; the residuals are undefined at `MU_MAX`.
const MU_REFINE_CAP: f64 = MU_MAX - 1e-9;
const GOLDEN: f64 = 1.618_033_988_749_895;
const INV_GOLDEN: f64 = 0.618_033_988_749_895;

struct LineBounds {
    lo: f64,
    hi: f64,
}

/// Minimize `f` along one coordinate starting at `x0` with trial step `h`.
/// Returns the best point found, never worse than `x0`.
fn line_minimize(f: &dyn Fn(f64) -> f64, x0: f64, f0: f64, h: f64, b: &LineBounds) -> (f64, f64) {
    let clamp = |x: f64| x.clamp(b.lo, b.hi);
    let mut best = (x0, f0);
    let consider = |x: f64, fx: f64, best: &mut (f64, f64)| {
        if fx < best.1 {
            *best = (x, fx);
        }
    };

    let xp = clamp(x0 + h);
    let fp = f(xp);
    consider(xp, fp, &mut best);
    let (dir, x1, f1) = if fp < f0 {
        (1.0, xp, fp)
    } else {
        let xm = clamp(x0 - h);
        let fm = f(xm);
        consider(xm, fm, &mut best);
        if fm < f0 {
            (-1.0, xm, fm)
        } else {
            // x0 already brackets a minimum
            return golden(f, xm, xp, best);
        }
    };

    // expand downhill until the energy rises or the domain ends
    let (mut a, mut m, mut fm) = (x0, x1, f1);
    let mut step = (x1 - x0).abs().max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        step *= GOLDEN;
        let next = clamp(m + dir * step);
        if next == m {
            return best;
        }
        let fnext = f(next);
        consider(next, fnext, &mut best);
        if fnext >= fm {
            let (lo, hi) = if dir > 0.0 { (a, next) } else { (next, a) };
            return golden(f, lo, hi, best);
        }
        a = m;
        m = next;
        fm = fnext;
    }
    best
}

fn golden(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, mut best: (f64, f64)) -> (f64, f64) {
    let mut c = b - INV_GOLDEN * (b - a);
    let mut d = a + INV_GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_GOLDEN * (b - a);
            fd = f(d);
        }
    }
    for (x, fx) in [(c, fc), (d, fd)] {
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

struct Refiner<'a> {
    params: &'a ModelParams,
    tol: f64,
    rho_cap: f64,
    max_iterations: usize,
}

impl Refiner<'_> {
    fn bounds(&self, coord: usize) -> LineBounds {
        match coord {
            0 => LineBounds { lo: 0.0, hi: self.rho_cap },
            1 => LineBounds { lo: 0.0, hi: MU_REFINE_CAP },
            _ => LineBounds { lo: f64::NEG_INFINITY, hi: f64::INFINITY },
        }
    }

    /// One cyclic sweep over the four coordinates.
    fn sweep(&self, x: &mut Point, e: &mut f64, steps: &mut Point) {
        for coord in 0..4 {
            let base = *x;
            let f = |v: f64| {
                let mut y = base;
                y[coord] = v;
                raw_energy(self.params, &y)
            };
            let (v, fv) = line_minimize(&f, x[coord], *e, steps[coord], &self.bounds(coord));
            let moved = (v - x[coord]).abs();
            if fv < *e {
                x[coord] = v;
                *e = fv;
            }
            steps[coord] = (2.0 * moved).clamp(1e-10, 1.0);
        }
    }

    /// Damped Newton step on the full landscape. Negative curvature is flipped and
    /// flat directions are skipped, so the step is always a descent direction.
    fn newton(&self, x: &mut Point, e: &mut f64, res: &mut f64) -> bool {
        let g = Vector4::from(raw_gradient(self.params, x));
        let eig = SymmetricEigen::new(numeric_hessian(self.params, x));
        let scale = eig.eigenvalues.amax().max(1e-300);
        let mut step = Vector4::zeros();
        for k in 0..4 {
            let lam = eig.eigenvalues[k];
            if lam.abs() > 1e-10 * scale {
                let v = eig.eigenvectors.column(k);
                step -= v * (v.dot(&g) / lam.abs());
            }
        }
        let slack = 1e-14 * e.abs().max(1.0);
        let mut alpha = 1.0;
        for _ in 0..40 {
            let mut y = *x;
            for i in 0..4 {
                y[i] += alpha * step[i];
            }
            y[0] = y[0].clamp(0.0, self.rho_cap);
            y[1] = y[1].clamp(0.0, MU_REFINE_CAP);
            let ey = raw_energy(self.params, &y);
            if ey < *e || (ey <= *e + slack && residual(self.params, &y) < *res) {
                *x = y;
                *e = e.min(ey);
                *res = residual(self.params, x);
                return true;
            }
            alpha *= 0.5;
        }
        false
    }

    fn run(&self, init: &MeanFieldState) -> Result<MeanFieldState> {
        let mut x: Point = [init.rho(), init.mu(), init.theta(), init.eta()];
        let mut e = raw_energy(self.params, &x);
        let mut res = residual(self.params, &x);
        let mut steps: Point = [0.05, 0.05, 0.2, 0.2];
        let mut iterations = 0;

        let fail = |x: &Point, e: f64, res: f64, iterations: usize| Error::Convergence {
            best: to_state(x).unwrap_or_else(|_| MeanFieldState::origin()),
            energy: e,
            residual: res,
            iterations,
        };

        while iterations < self.max_iterations {
            if res < self.tol {
                return to_state(&x);
            }
            // coarse descent, then Newton polishing once in the basin
            let mut stalled = 0;
            for _ in 0..50 {
                let before = e;
                self.sweep(&mut x, &mut e, &mut steps);
                iterations += 1;
                if before - e <= 1e-13 * e.abs().max(1.0) {
                    stalled += 1;
                    if stalled >= 3 {
                        break;
                    }
                } else {
                    stalled = 0;
                }
            }
            res = residual(self.params, &x);
            for _ in 0..50 {
                if res < self.tol || x[0] >= self.rho_cap {
                    break;
                }
                iterations += 1;
                if !self.newton(&mut x, &mut e, &mut res) {
                    break;
                }
            }
            if x[0] >= self.rho_cap || x[1] >= MU_REFINE_CAP {
                // the energy keeps decreasing towards the edge of the domain
                return Err(fail(&x, e, res, iterations));
            }
        }
        if res < self.tol {
            to_state(&x)
        } else {
            Err(fail(&x, e, res, iterations))
        }
    }
}

/// Refine `init` to a stationary point with every equilibrium residual below `tol`.
/// The energy never increases along the way.
pub fn refine(params: &ModelParams, init: &MeanFieldState, tol: f64) -> Result<MeanFieldState> {
    refine_with_budget(params, init, tol, 100_000)
}

fn refine_with_budget(
    params: &ModelParams,
    init: &MeanFieldState,
    tol: f64,
    max_iterations: usize,
) -> Result<MeanFieldState> {
    if init.mu() >= MU_MAX {
        return Err(Error::Domain { mu: init.mu(), limit: MU_MAX });
    }
    let zeta_max = params.lambda().abs() + params.kappa().abs();
    let rho_cap = 1e3 * (1.0 + init.rho() + zeta_max / params.omega());
    Refiner { params, tol, rho_cap, max_iterations }.run(init)
}

fn axis(count: usize, max: f64, i: usize) -> f64 {
    max * i as f64 / (count - 1) as f64
}

fn angle_axis(count: usize, k: usize) -> f64 {
    TAU * k as f64 / count as f64
}

/// Grid cells that are no higher than any of their neighbours (periodic in the
/// angles) and lie within the energy window of the best cell, best first.
pub fn grid_search(params: &ModelParams, spec: &SearchSpec) -> Vec<MeanFieldState> {
    let (nr, nm, nt, ne) = (spec.n_rho, spec.n_mu, spec.n_theta, spec.n_eta);
    let (w, big_w, u) = (params.omega(), params.big_omega(), params.u());

    let mut a = vec![0.0; nr * nm];
    let mut b = vec![0.0; nr * nm];
    for i in 0..nr {
        let rho = axis(nr, spec.rho_max, i);
        for j in 0..nm {
            let mu = axis(nm, spec.mu_max, j);
            a[i * nm + j] = w * rho * rho + (big_w + u * rho * rho) * (mu * mu - 0.5);
            b[i * nm + j] = 2.0 * rho * mu * (1.0 - mu * mu).sqrt();
        }
    }
    let mut z = vec![0.0; nt * ne];
    for k in 0..nt {
        let theta = angle_axis(nt, k);
        for l in 0..ne {
            let eta = angle_axis(ne, l);
            z[k * ne + l] = params.lambda() * (theta - eta).cos() + params.kappa() * (theta + eta).cos();
        }
    }
    let z_max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let energy = |i: usize, j: usize, k: usize, l: usize| a[i * nm + j] - b[i * nm + j] * z[k * ne + l];
    // lowest energy over the angle grid at fixed amplitudes (b >= 0)
    let floor: Vec<f64> = (0..nr * nm).map(|c| a[c] - b[c] * z_max).collect();
    let best = floor.iter().copied().fold(f64::INFINITY, f64::min);
    let cutoff = best + spec.energy_window * best.abs().max(1.0);

    let neighbours = |n: usize, i: usize| -> Vec<usize> {
        let mut v = vec![i];
        if i > 0 {
            v.push(i - 1);
        }
        if i + 1 < n {
            v.push(i + 1);
        }
        v
    };
    let wrap = |n: usize, i: usize| -> [usize; 3] { [(i + n - 1) % n, i, (i + 1) % n] };

    let mut found: Vec<(f64, usize, usize, usize, usize)> = (0..nr * nm)
        .into_par_iter()
        .flat_map_iter(|cell| {
            let (i, j) = (cell / nm, cell % nm);
            let mut out = Vec::new();
            if floor[cell] > cutoff {
                return out;
            }
            let ri = neighbours(nr, i);
            let mj = neighbours(nm, j);
            if b[cell] == 0.0 {
                // angles are irrelevant: compare against the best angle of every adjacent cell
                let e = a[cell];
                let is_min = ri.iter().all(|&i2| mj.iter().all(|&j2| e <= floor[i2 * nm + j2]));
                if is_min {
                    out.push((e, i, j, 0, 0));
                }
                return out;
            }
            for k in 0..nt {
                for l in 0..ne {
                    let e = energy(i, j, k, l);
                    if e > cutoff {
                        continue;
                    }
                    let is_min = ri.iter().all(|&i2| {
                        mj.iter().all(|&j2| {
                            if b[i2 * nm + j2] == 0.0 {
                                return e <= a[i2 * nm + j2];
                            }
                            wrap(nt, k)
                                .iter()
                                .all(|&k2| wrap(ne, l).iter().all(|&l2| e <= energy(i2, j2, k2, l2)))
                        })
                    });
                    if is_min {
                        out.push((e, i, j, k, l));
                    }
                }
            }
            out
        })
        .collect();

    found.sort_by(|x, y| x.0.total_cmp(&y.0).then_with(|| (x.1, x.2, x.3, x.4).cmp(&(y.1, y.2, y.3, y.4))));
    found.truncate(spec.max_candidates);
    found
        .into_iter()
        .map(|(_, i, j, k, l)| {
            MeanFieldState::new(axis(nr, spec.rho_max, i), axis(nm, spec.mu_max, j), angle_axis(nt, k), angle_axis(ne, l))
                .expect("grid points lie in the domain")
        })
        .collect()
}

/// Starting points just off the origin along its most unstable direction, used
/// when the grid is too coarse to resolve a small superradiant amplitude.
fn escape_starts(params: &ModelParams) -> Vec<MeanFieldState> {
    // best phase differences maximise zeta_+ = |lambda| + |kappa|
    let d = if params.lambda() >= 0.0 { 0.0 } else { std::f64::consts::PI };
    let s = if params.kappa() >= 0.0 { 0.0 } else { std::f64::consts::PI };
    let theta = 0.5 * (d + s);
    let eta = 0.5 * (s - d);
    let zeta = params.lambda().abs() + params.kappa().abs();
    let m11 = 2.0 * params.omega() - params.u();
    let m22 = 2.0 * params.big_omega();
    let m12 = -2.0 * zeta;
    let tr = m11 + m22;
    let disc = ((m11 - m22).powi(2) + 4.0 * m12 * m12).sqrt();
    let low = 0.5 * (tr - disc);
    if low >= 0.0 {
        return Vec::new();
    }
    // eigenvector of the lowest eigenvalue
    let (vr, vm) = if m12.abs() > 0.0 { (low - m22, m12) } else if m11 < m22 { (1.0, 0.0) } else { (0.0, 1.0) };
    let norm = (vr * vr + vm * vm).sqrt();
    let (vr, vm) = ((vr / norm).abs(), (vm / norm).abs());
    [1e-3, 1e-2, 1e-1]
        .iter()
        .filter_map(|&scale| MeanFieldState::new(scale * vr, (scale * vm).min(0.9), theta, eta).ok())
        .collect()
}

fn cmp_state(a: &MeanFieldState, b: &MeanFieldState) -> Ordering {
    a.rho()
        .total_cmp(&b.rho())
        .then(a.mu().total_cmp(&b.mu()))
        .then(a.theta().total_cmp(&b.theta()))
        .then(a.eta().total_cmp(&b.eta()))
}

/// Amplitudes this small are reported as the normal-phase origin.
const NP_AMPLITUDE: f64 = 1e-6;

/// Radius within which a state degenerate with the origin is replaced by it.
const NEAR_ORIGIN: f64 = 1e-2;

fn canonical(state: MeanFieldState) -> MeanFieldState {
    if state.rho() < NP_AMPLITUDE && state.mu() < NP_AMPLITUDE {
        MeanFieldState::origin()
    } else {
        state
    }
}

/// Family along which the energy stays flat through `state`, if any.
fn flat_family(params: &ModelParams, state: &MeanFieldState, tol: f64) -> Option<AngleFamily> {
    if state.rho() < NP_AMPLITUDE || state.mu() < NP_AMPLITUDE {
        return None;
    }
    let e0 = scaled_energy(params, state);
    // shifts away from pi, which is the Z2 image for every parameter set
    let shifts = [0.5, 1.3, 2.2, 4.0];
    [AngleFamily::CoRotating, AngleFamily::CounterRotating].into_iter().find(|family| {
        shifts.iter().all(|&phi| {
            let moved = match family {
                AngleFamily::CoRotating => state.with_angles(state.theta() + phi, state.eta() + phi),
                AngleFamily::CounterRotating => state.with_angles(state.theta() + phi, state.eta() - phi),
            };
            (scaled_energy(params, &moved) - e0).abs() <= tol
        })
    })
}

/// `theta_k = 2 pi k / n` along the flat family through `state`.
pub fn resample_family(state: &MeanFieldState, family: AngleFamily, n: usize) -> Vec<MeanFieldState> {
    (0..n)
        .map(|k| {
            let theta = angle_axis(n, k);
            let eta = match family {
                AngleFamily::CoRotating => theta - (state.theta() - state.eta()),
                AngleFamily::CounterRotating => (state.theta() + state.eta()) - theta,
            };
            state.with_angles(theta, eta)
        })
        .collect()
}

/// Global minima of the scaled energy.
pub fn global_minima(params: &ModelParams, spec: &SearchSpec) -> Result<MinimizerSet> {
    spec.validate()?;
    let mut starts = grid_search(params, spec);
    starts.extend(escape_starts(params));

    let outcomes: Vec<Result<MeanFieldState>> = starts
        .par_iter()
        .map(|s| refine_with_budget(params, s, spec.refine_tol, spec.max_iterations))
        .collect();
    let origin_energy = scaled_energy(params, &MeanFieldState::origin());
    let mut first_err = None;
    let mut refined: Vec<(f64, MeanFieldState)> = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(s) => {
                let s = canonical(s);
                let e = scaled_energy(params, &s);
                // on a threshold the energy is quartic around the origin and the
                // residual test stops short of it
                let s = if s.rho() < NEAR_ORIGIN
                    && s.mu() < NEAR_ORIGIN
                    && (e - origin_energy).abs() <= spec.degeneracy_tol(origin_energy)
                {
                    MeanFieldState::origin()
                } else {
                    s
                };
                refined.push((scaled_energy(params, &s), s));
            }
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    if refined.is_empty() {
        return Err(first_err.unwrap_or(Error::Convergence {
            best: MeanFieldState::origin(),
            energy: f64::NAN,
            residual: f64::NAN,
            iterations: 0,
        }));
    }
    if let Some(err @ Error::Convergence { energy, .. }) = &first_err {
        // a diverging candidate below every converged one means the energy is unbounded
        let best = refined.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
        if *energy < best - spec.degeneracy_tol(best) {
            return Err(err.clone());
        }
    }

    refined.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| cmp_state(&a.1, &b.1)));
    let ground_energy = refined[0].0;
    let tol = spec.degeneracy_tol(ground_energy);
    let mut states: Vec<MeanFieldState> = Vec::new();
    for (e, s) in refined {
        if e > ground_energy + tol {
            break;
        }
        if !states.iter().any(|t| t.approx_eq(&s, spec.amp_tol, spec.angle_tol)) {
            states.push(s);
        }
    }
    states.sort_by(cmp_state);

    let family = flat_family(params, &states[0], tol);
    if let Some(family) = family {
        states = resample_family(&states[0], family, spec.manifold_samples);
    }
    Ok(MinimizerSet { states, ground_energy, degenerate_manifold: family.is_some(), family })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{sp_ground_energy, sp_solutions, SpBranch};
    use crate::landscape::{classify_stability, StabilityClass};
    use std::f64::consts::PI;

    fn p(lambda: f64, kappa: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, lambda, kappa, 0.0).unwrap()
    }

    #[test]
    fn grid_examples() {
        let params = p(0.3, 0.3);
        let c = grid_search(&params, &SearchSpec::default_for(&params));
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].rho(), c[0].mu()), (0.0, 0.0));

        let params = p(1.0, 1.0);
        let c = grid_search(&params, &SearchSpec::default_for(&params));
        let near = |t: f64, e: f64| {
            c.iter().any(|s| {
                (s.rho() - 0.968).abs() < 0.1
                    && (s.mu() - 0.612).abs() < 0.05
                    && crate::model::angle_distance(s.theta(), t) < 0.01
                    && crate::model::angle_distance(s.eta(), e) < 0.01
            })
        };
        assert!(near(0.0, 0.0) && near(PI, PI));

        let params = p(1.0, 0.0);
        let c = grid_search(&params, &SearchSpec::default_for(&params));
        assert!(c.len() >= 8);
        assert!(c.iter().all(|s| crate::model::angle_distance(s.theta(), s.eta()) < 1e-9));
    }

    #[test]
    fn refine_examples() {
        let params = p(1.0, 1.0);
        let exact = sp_solutions(&params, SpBranch::X, 0).unwrap()[0];
        let init = MeanFieldState::new(exact.rho() + 1e-3, exact.mu() - 1e-3, 1e-3, 2.0 * PI - 1e-3).unwrap();
        let r = refine(&params, &init, 1e-10).unwrap();
        assert!(r.approx_eq(&exact, 1e-8, 1e-8), "{r:?}");

        let params = p(0.3, 0.3);
        let r = refine(&params, &MeanFieldState::origin(), 1e-10).unwrap();
        assert_eq!(r, MeanFieldState::origin());

        let params = p(1.0, 1.0);
        let r = refine(&params, &MeanFieldState::new(0.5, 0.5, 0.0, 0.0).unwrap(), 1e-10).unwrap();
        assert!(r.approx_eq(&exact, 1e-8, 1e-8), "{r:?}");
    }

    #[test]
    fn refine_never_raises_energy() {
        let params = ModelParams::new(1.0, 0.8, 0.9, -0.6, 0.3).unwrap();
        let init = MeanFieldState::new(0.7, 0.4, 1.0, 2.0).unwrap();
        let r = refine(&params, &init, 1e-10).unwrap();
        assert!(scaled_energy(&params, &r) <= scaled_energy(&params, &init));
        assert!(equilibrium_residuals(&params, &r).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn refine_reports_runaway() {
        // U > 2 omega makes the energy unbounded below along mu = 0
        let params = ModelParams::new(1.0, 1.0, 0.1, 0.1, 3.0).unwrap();
        let init = MeanFieldState::new(1.0, 0.1, 0.0, 0.0).unwrap();
        match refine(&params, &init, 1e-10) {
            Err(Error::Convergence { best, energy, .. }) => {
                assert!(energy < scaled_energy(&params, &init));
                assert!(best.rho() > 1.0);
            }
            other => panic!("expected a convergence error, got {other:?}"),
        }
    }

    #[test]
    fn global_examples() {
        let params = p(0.0, 0.0);
        let m = global_minima(&params, &SearchSpec::default_for(&params)).unwrap();
        assert_eq!(m.ground_energy, -0.5);
        assert!(m.is_normal());

        let params = p(1.0, 1.0);
        let m = global_minima(&params, &SearchSpec::default_for(&params)).unwrap();
        assert!((m.ground_energy + 1.0625).abs() < 1e-12);
        assert_eq!(m.states.len(), 2);
        assert!(!m.degenerate_manifold);

        // lambda = 1 sits exactly on the threshold, where the ring shrinks onto the origin
        let params = p(1.0, 0.0);
        let m = global_minima(&params, &SearchSpec::default_for(&params)).unwrap();
        assert!(m.is_normal() && !m.degenerate_manifold);

        let params = p(1.5, 0.0);
        let m = global_minima(&params, &SearchSpec::default_for(&params)).unwrap();
        assert!(m.degenerate_manifold);
        assert_eq!(m.family, Some(AngleFamily::CoRotating));
        assert_eq!(m.states.len(), 16);
    }

    #[test]
    fn counter_rotating_manifold_on_lambda_zero_line() {
        let params = p(0.0, -1.5);
        let m = global_minima(&params, &SearchSpec::default_for(&params)).unwrap();
        assert_eq!(m.family, Some(AngleFamily::CounterRotating));
        let e = sp_ground_energy(&params, SpBranch::DegKappa).unwrap();
        assert!((m.ground_energy - e).abs() < 1e-12);
        for s in &m.states {
            assert!((scaled_energy(&params, s) - e).abs() < 1e-12);
            assert!(crate::model::angle_distance(s.theta() + s.eta(), PI) < 1e-6);
        }
    }

    #[test]
    fn small_amplitudes_just_past_threshold() {
        // rho ~ 0.03 is below the grid spacing; the escape start finds it
        let params = p(0.501, 0.501);
        let m = global_minima(&params, &SearchSpec::default_for(&params)).unwrap();
        let e = sp_ground_energy(&params, SpBranch::X).unwrap();
        assert!(e < -0.5);
        assert!((m.ground_energy - e).abs() < 1e-12);
        assert_eq!(m.states.len(), 2);
    }

    #[test]
    fn minimizers_are_never_saddles() {
        for (l, k, u) in [(0.3, 0.3, 0.0), (1.0, 1.0, 0.0), (1.0, -0.5, 0.0), (1.5, 0.0, 0.0), (0.8, 0.6, 0.5), (-1.2, 0.4, -0.3)] {
            let params = ModelParams::new(1.0, 1.0, l, k, u).unwrap();
            let m = global_minima(&params, &SearchSpec::default_for(&params)).unwrap();
            for s in &m.states {
                let at_np = s.rho() * s.mu() < 1e-14;
                let class = classify_stability(&params, s, at_np).unwrap().class;
                assert!(
                    matches!(class, StabilityClass::StableMinimum | StabilityClass::Marginal),
                    "{l} {k} {u}: {class:?} at {s:?}"
                );
            }
        }
    }

    #[test]
    fn deterministic() {
        let params = ModelParams::new(1.0, 1.0, 0.9, -0.7, 0.2).unwrap();
        let spec = SearchSpec::default_for(&params);
        let a = global_minima(&params, &spec).unwrap();
        let b = global_minima(&params, &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spec_validation() {
        let params = p(1.0, 1.0);
        let mut spec = SearchSpec::default_for(&params);
        spec.mu_max = 1.0;
        assert!(spec.validate().is_err());
        let mut spec = SearchSpec::default_for(&params);
        spec.n_rho = 1;
        assert!(global_minima(&params, &spec).is_err());
    }
}
