//! Common spectral gap of `a +- delta b` and the band-inversion flag.

use crate::dirac::{rotation_eigenvalue, tau, DiracPointData};
use crate::planewave::{BandError, DeltaSign, PlaneWaveSolver};
use lattice::Vec2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapReport {
    pub interval: (f64, f64),
    pub width: f64,
    /// First-order prediction `2 |t*| delta`.
    pub predicted_width: f64,
    pub inversion: bool,
    pub upper_tau_plus: [f64; 2],
    pub upper_tau_minus: [f64; 2],
    pub mesh: usize,
}

/// Quasi-momenta `(i e1s + j e2s) / n`; with `3 | n` the mesh contains `K` and `K'`.
pub fn bz_mesh(solver: &PlaneWaveSolver, n: usize) -> Vec<Vec2> {
    let g = &solver.medium.geometry;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            out.push((i as f64 / n as f64) * g.e1s + (j as f64 / n as f64) * g.e2s);
        }
    }
    out
}

pub fn gap_and_inversion(solver: &PlaneWaveSolver, d: &DiracPointData, mesh: usize) -> Result<GapReport, BandError> {
    let delta = solver.medium.params.delta;
    let pts = bz_mesh(solver, mesh);
    let mut lower: f64 = f64::NEG_INFINITY;
    let mut upper: f64 = f64::INFINITY;
    for sign in [DeltaSign::Plus, DeltaSign::Minus] {
        let bands = pts
            .par_iter()
            .map(|&k| solver.solve(k, 2, sign).map(|r| (r.eigenvalues[0], r.eigenvalues[1])))
            .collect::<Result<Vec<_>, _>>()?;
        for (l1, l2) in bands {
            lower = lower.max(l1);
            upper = upper.min(l2);
        }
    }
    let width = upper - lower;
    let tol = 1e-8 * d.lambda_star.abs().max(1.0);
    if delta == 0.0 || width <= tol {
        return Err(BandError::GapClosed(width));
    }
    let k = solver.medium.geometry.k;
    let upper_tau = |sign| -> Result<_, BandError> {
        let r = solver.solve(k, 2, sign)?;
        Ok(rotation_eigenvalue(&r, solver, 1).expect("K is rotation-fixed"))
    };
    let tp = upper_tau(DeltaSign::Plus)?;
    let tm = upper_tau(DeltaSign::Minus)?;
    let near_tau = |z: faer::c64| (z - tau()).norm() < (z - tau().conj()).norm();
    Ok(GapReport {
        interval: (lower, upper),
        width,
        predicted_width: 2.0 * d.t_star().abs() * delta,
        inversion: near_tau(tp) != near_tau(tm),
        upper_tau_plus: [tp.re, tp.im],
        upper_tau_minus: [tm.re, tm.im],
        mesh,
    })
}
