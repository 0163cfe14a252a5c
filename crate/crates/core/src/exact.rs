//! Finite-`N` exact diagonalization in the Fock x Dicke basis `|n> (x) |j = N/2, m>`.
//!
//! Basis index `n * (N + 1) + k` with `k = m + N/2`. The excitation-number parity
//! `(-1)^(n + k)` commutes with the Hamiltonian for every coupling, so the ground
//! state is found separately in both parity sectors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Largest Hilbert-space dimension `(n_max + 1)(N + 1)` accepted.
pub const MAX_DIMENSION: usize = 200_000;

/// Sector dimensions below this are solved densely.
pub const DENSE_LIMIT: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdConfig {
    pub n_atoms: usize,
    pub n_max: usize,
    /// Largest tolerated weight in the top Fock level.
    pub convergence_tol: f64,
    /// Relative tolerance on the lowest eigenvalue.
    pub eigen_tol: f64,
}

impl EdConfig {
    pub fn new(n_atoms: usize, n_max: usize) -> Self {
        Self { n_atoms, n_max, convergence_tol: 1e-10, eigen_tol: 1e-10 }
    }

    pub fn dimension(&self) -> usize {
        (self.n_max + 1) * (self.n_atoms + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 || self.n_max == 0 {
            return Err(Error::InvalidParams("N and n_max must be positive".into()));
        }
        if !(self.convergence_tol > 0.0 && self.eigen_tol > 0.0) {
            return Err(Error::InvalidParams("tolerances must be positive".into()));
        }
        let dim = self
            .n_max
            .checked_add(1)
            .and_then(|a| a.checked_mul(self.n_atoms + 1))
            .unwrap_or(usize::MAX);
        if dim > MAX_DIMENSION {
            return Err(Error::Dimension { dim, limit: MAX_DIMENSION });
        }
        Ok(())
    }
}

/// Real symmetric sparse Hamiltonian, stored row-wise.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub n_atoms: usize,
    pub n_max: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn index(&self, n: usize, k: usize) -> usize {
        n * (self.n_atoms + 1) + k
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().filter(|(c, _)| *c == j).map(|(_, v)| v).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] += v;
            }
        }
        m
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(&self.rows) {
            *yi = row.iter().map(|&(j, v)| v * x[j]).sum();
        }
    }

    /// `(-1)^(n + k)` of basis state `i`.
    pub fn parity_of(&self, i: usize) -> i32 {
        let (n, k) = (i / (self.n_atoms + 1), i % (self.n_atoms + 1));
        if (n + k) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// `max |H Pi - Pi H|` entrywise.
    pub fn parity_commutator_norm(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                let d = (self.parity_of(j) - self.parity_of(i)) as f64 * v;
                worst = worst.max(d.abs());
            }
        }
        worst
    }

    /// `max |H - H^T|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                worst = worst.max((v - self.entry(j, i)).abs());
            }
        }
        worst
    }

    /// Restriction to one parity sector, with the full-basis index of each sector state.
    fn sector(&self, parity: i32) -> (Vec<usize>, Hamiltonian) {
        let members: Vec<usize> = (0..self.dim()).filter(|&i| self.parity_of(i) == parity).collect();
        let mut local = vec![usize::MAX; self.dim()];
        for (a, &i) in members.iter().enumerate() {
            local[i] = a;
        }
        let rows = members
            .iter()
            .map(|&i| self.rows[i].iter().map(|&(j, v)| (local[j], v)).collect())
            .collect();
        (members, Hamiltonian { n_atoms: self.n_atoms, n_max: self.n_max, rows })
    }
}

/// Hamiltonian in the maximal-spin sector:
///
/// ```text
/// omega a^dag a + Omega J_z + (lambda/sqrt N)(a^dag J_- + a J_+)
///   + (kappa/sqrt N)(a^dag J_+ + a J_-) + (U/N) a^dag a J_z
/// ```
pub fn build_hamiltonian(params: &ModelParams, cfg: &EdConfig) -> Result<Hamiltonian> {
    cfg.validate()?;
    let (nn, nmax) = (cfg.n_atoms, cfg.n_max);
    let natoms = nn as f64;
    let half = natoms / 2.0;
    let g_co = params.lambda() / natoms.sqrt();
    let g_counter = params.kappa() / natoms.sqrt();
    let dim = cfg.dimension();
    let idx = |n: usize, k: usize| n * (nn + 1) + k;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(5); dim];

    for n in 0..=nmax {
        for k in 0..=nn {
            let i = idx(n, k);
            let m = k as f64 - half;
            let nf = n as f64;
            rows[i].push((i, params.omega() * nf + (params.big_omega() + params.u() * nf / natoms) * m));
            if n < nmax {
                let boson = (nf + 1.0).sqrt();
                let kf = k as f64;
                // a^dag J_- : k -> k - 1
                if k > 0 && g_co != 0.0 {
                    let v = g_co * boson * (kf * (natoms - kf + 1.0)).sqrt();
                    let j = idx(n + 1, k - 1);
                    rows[i].push((j, v));
                    rows[j].push((i, v));
                }
                // a^dag J_+ : k -> k + 1
                if k < nn && g_counter != 0.0 {
                    let v = g_counter * boson * ((natoms - kf) * (kf + 1.0)).sqrt();
                    let j = idx(n + 1, k + 1);
                    rows[i].push((j, v));
                    rows[j].push((i, v));
                }
            }
        }
    }
    Ok(Hamiltonian { n_atoms: nn, n_max: nmax, rows })
}

fn canonical_sign(v: &mut DVector<f64>) {
    let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    if pivot < 0.0 {
        v.neg_mut();
    }
}

fn dense_lowest(h: &Hamiltonian) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(h.to_dense());
    let (k, e0) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &e)| if e < acc.1 { (i, e) } else { acc });
    (e0, eig.eigenvectors.column(k).into_owned())
}

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization.
pub fn lanczos_lowest(h: &Hamiltonian, tol: f64, krylov: usize, max_restarts: usize) -> Result<(f64, DVector<f64>)> {
    let dim = h.dim();
    let m = krylov.min(dim).max(1);
    // deterministic start vector with weight on every basis state
    let mut start = DVector::from_fn(dim, |i, _| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_749_895).fract());
    start /= start.norm();
    let mut w = vec![0.0; dim];
    let mut last = f64::NAN;

    for _ in 0..max_restarts {
        let mut basis: Vec<DVector<f64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut tail = 0.0;
        for j in 0..m {
            h.matvec(basis[j].as_slice(), &mut w);
            let mut r = DVector::from_column_slice(&w);
            let a = basis[j].dot(&r);
            alpha.push(a);
            // full reorthogonalization, twice for stability
            for _ in 0..2 {
                for q in &basis {
                    let c = q.dot(&r);
                    r.axpy(-c, q, 1.0);
                }
            }
            let b = r.norm();
            if j + 1 == m || b <= 1e-14 * a.abs().max(1.0) {
                tail = b;
                break;
            }
            beta.push(b);
            basis.push(r / b);
        }
        let k = alpha.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (idx, theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &e)| if e < acc.1 { (i, e) } else { acc });
        let s = eig.eigenvectors.column(idx);
        let mut ritz = DVector::zeros(dim);
        for (q, &c) in basis.iter().zip(s.iter()) {
            ritz.axpy(c, q, 1.0);
        }
        ritz /= ritz.norm();
        let residual = (tail * s[k - 1]).abs();
        if residual <= tol * theta.abs().max(1.0) || k == dim || (theta - last).abs() <= 1e-3 * tol * theta.abs().max(1.0) && residual <= 1e-6 {
            return Ok((theta, ritz));
        }
        last = theta;
        start = ritz;
    }
    Err(Error::Eigensolver(format!("Lanczos did not reach relative residual {tol:e}")))
}

fn lowest(h: &Hamiltonian, tol: f64) -> Result<(f64, DVector<f64>)> {
    if h.dim() < DENSE_LIMIT {
        Ok(dense_lowest(h))
    } else {
        lanczos_lowest(h, tol, 120, 200)
    }
}

/// Lowest eigenpair over both parity sectors; the vector has definite parity and
/// its largest component is positive.
pub fn ground_state(h: &Hamiltonian, cfg: &EdConfig) -> Result<(f64, DVector<f64>)> {
    let mut best: Option<(f64, DVector<f64>)> = None;
    for parity in [1, -1] {
        let (members, sub) = h.sector(parity);
        if members.is_empty() {
            continue;
        }
        let (e, v) = lowest(&sub, cfg.eigen_tol)?;
        if best.as_ref().is_none_or(|(b, _)| e < *b) {
            let mut full = DVector::zeros(h.dim());
            for (a, &i) in members.iter().enumerate() {
                full[i] = v[a];
            }
            best = Some((e, full));
        }
    }
    let (e, mut v) = best.expect("at least one sector is non-empty");
    canonical_sign(&mut v);
    Ok((e, v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdResult {
    pub n_atoms: usize,
    pub e0_per_atom: f64,
    pub n_photon_per_atom: f64,
    pub jz_per_atom: f64,
    /// `<J_x^2 + J_y^2> / N^2`; `<J_x>` itself vanishes in a parity eigenstate.
    pub jperp2: f64,
    pub parity: f64,
    pub cutoff_used: usize,
    /// Weight of the top Fock level.
    pub top_weight: f64,
}

/// Observables of a normalised state in the basis of `h`.
pub fn observables(h: &Hamiltonian, e0: f64, psi: &DVector<f64>) -> EdResult {
    let nn = h.n_atoms;
    let natoms = nn as f64;
    let half = natoms / 2.0;
    let (mut n_ph, mut jz, mut jz2, mut parity, mut top) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &c) in psi.iter().enumerate() {
        let w = c * c;
        let (n, k) = (i / (nn + 1), i % (nn + 1));
        let m = k as f64 - half;
        n_ph += w * n as f64;
        jz += w * m;
        jz2 += w * m * m;
        parity += w * h.parity_of(i) as f64;
        if n == h.n_max {
            top += w;
        }
    }
    EdResult {
        n_atoms: nn,
        e0_per_atom: e0 / natoms,
        n_photon_per_atom: n_ph / natoms,
        jz_per_atom: jz / natoms,
        jperp2: (half * (half + 1.0) - jz2) / (natoms * natoms),
        parity,
        cutoff_used: h.n_max,
        top_weight: top,
    }
}

/// Ground state at fixed cutoff.
pub fn solve(params: &ModelParams, cfg: &EdConfig) -> Result<EdResult> {
    let h = build_hamiltonian(params, cfg)?;
    let (e0, psi) = ground_state(&h, cfg)?;
    Ok(observables(&h, e0, &psi))
}

/// Ground state with the cutoff doubled until the top Fock level carries less
/// than `convergence_tol` of the weight and holds at least twice the photon number.
pub fn solve_adaptive(params: &ModelParams, cfg: &EdConfig) -> Result<EdResult> {
    let mut cfg = *cfg;
    loop {
        let r = solve(params, &cfg)?;
        let photons = r.n_photon_per_atom * cfg.n_atoms as f64;
        if r.top_weight < cfg.convergence_tol && photons <= cfg.n_max as f64 / 2.0 {
            return Ok(r);
        }
        cfg.n_max *= 2;
        cfg.validate()?;
    }
}

pub fn finite_size_scan(params: &ModelParams, n_list: &[usize], template: &EdConfig) -> Result<Vec<EdResult>> {
    n_list
        .par_iter()
        .map(|&n| solve_adaptive(params, &EdConfig { n_atoms: n, ..*template }))
        .collect()
}
