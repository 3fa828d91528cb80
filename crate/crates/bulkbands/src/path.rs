//! Piecewise-linear path `M -> K -> Gamma -> M` through the Brillouin zone.

use crate::planewave::{BandError, DeltaSign, PlaneWaveSolver};
use lattice::Vec2;
use rayon::prelude::*;

pub fn high_symmetry_path(solver: &PlaneWaveSolver, per_leg: usize) -> Vec<(f64, Vec2)> {
    let g = &solver.medium.geometry;
    let m = 0.5 * g.e2s;
    let corners = [m, g.k, Vec2::zeros(), m];
    let mut out = Vec::new();
    let mut arc = 0.0;
    for w in corners.windows(2) {
        let len = (w[1] - w[0]).norm();
        for i in 0..per_leg {
            let s = i as f64 / per_leg as f64;
            out.push((arc + s * len, w[0] + s * (w[1] - w[0])));
        }
        arc += len;
    }
    out.push((arc, m));
    out
}

/// Rows `(arc length, lambda_1..lambda_n)` along the path.
pub fn bands_along_path(solver: &PlaneWaveSolver, per_leg: usize, nbands: usize, sign: DeltaSign) -> Result<Vec<(f64, Vec<f64>)>, BandError> {
    high_symmetry_path(solver, per_leg)
        .par_iter()
        .map(|&(s, k)| solver.solve(k, nbands, sign).map(|r| (s, r.eigenvalues)))
        .collect()
}
