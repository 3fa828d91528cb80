//! Doubly periodic finite elements on one cell, for the discrete Dirac point.

use crate::mesh::{MeshGeometry, RawNode};
use faer::{Mat, Side};
use lattice::{MediumSpec, Vec2};
use num_complex::Complex64 as C64;

/// Cell `[0,1)^2` in `(s, t)` with Bloch phases `(kappa.e1, kappa.g)` on both identifications.
#[derive(Debug, Clone)]
pub struct CellProblem {
    pub geom: MeshGeometry,
    n: usize,
    elements: Vec<crate::mesh::Element>,
}

impl CellProblem {
    pub fn new(n: usize, coef: &dyn Fn(&Vec2) -> f64) -> Self {
        let geom = MeshGeometry::new(n);
        let mut elements = Vec::new();
        for j in 0..(3 * n) as i64 {
            for i in 0..n as i64 {
                for shape in 0..2 {
                    elements.push(geom.element((i, j), shape, coef));
                }
            }
        }
        CellProblem { geom, n, elements }
    }

    pub fn len(&self) -> usize {
        3 * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn locate(&self, p: RawNode) -> ((i64, i64), usize) {
        let n = self.n as i64;
        let (ci, i) = (p.0.div_euclid(n), p.0.rem_euclid(n));
        let (cj, j) = (p.1.div_euclid(3 * n), p.1.rem_euclid(3 * n));
        ((ci, cj), (j * n + i) as usize)
    }

    /// Dense stiffness and mass at the quasi-momentum `kappa`.
    pub fn matrices(&self, kappa: &Vec2) -> (Mat<C64>, Mat<C64>) {
        let (p1, p2) = self.geom.lattice.strip_phases(kappa);
        let n = self.len();
        let mut k = Mat::<C64>::zeros(n, n);
        let mut m = Mat::<C64>::zeros(n, n);
        for e in &self.elements {
            let loc = e.verts.map(|v| self.locate(v));
            for a in 0..3 {
                for b in 0..3 {
                    let (ca, ia) = loc[a];
                    let (cb, ib) = loc[b];
                    let ph = C64::from_polar(1.0, p1 * (cb.0 - ca.0) as f64 + p2 * (cb.1 - ca.1) as f64);
                    k[(ia, ib)] += ph * e.k[a][b];
                    m[(ia, ib)] += ph * e.m[a][b];
                }
            }
        }
        (k, m)
    }

    /// Lowest `count` eigenvalues at `kappa`.
    pub fn eigenvalues(&self, kappa: &Vec2, count: usize) -> Vec<f64> {
        let (k, m) = self.matrices(kappa);
        generalized_hermitian_eigenvalues(&k, &m).into_iter().take(count).collect()
    }
}

/// Eigenvalues of `K x = lambda M x` through the symmetric whitening `M^{-1/2} K M^{-1/2}`.
pub fn generalized_hermitian_eigenvalues(k: &Mat<C64>, m: &Mat<C64>) -> Vec<f64> {
    let em = m.self_adjoint_eigen(Side::Lower).expect("mass eigendecomposition");
    let d = em.S().column_vector();
    let v = em.U();
    let w = Mat::from_fn(m.nrows(), m.ncols(), |i, j| v[(i, j)] * (1.0 / d[j].re.sqrt()));
    let a = w.adjoint() * k * &w;
    let a = Mat::from_fn(a.nrows(), a.ncols(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
    let e = a.self_adjoint_eigen(Side::Lower).expect("whitened eigendecomposition");
    let s = e.S().column_vector();
    let mut out: Vec<f64> = (0..s.nrows()).map(|i| s[i].re).collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Discrete Dirac point of the unperturbed medium on the cell mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDiracPoint {
    pub lambda_star: f64,
    pub split: f64,
    pub lowest: Vec<f64>,
}

/// Closest pair among the lowest three eigenvalues at `K` for `a` (no `b`).
pub fn discrete_dirac_point(medium: &MediumSpec, n: usize) -> DiscreteDiracPoint {
    let cell = CellProblem::new(n, &|x| medium.a(x));
    let lowest = cell.eigenvalues(&medium.geometry.k, 4);
    let (i, split) =
        (0..2).map(|i| (i, lowest[i + 1] - lowest[i])).min_by(|a, b| a.1.partial_cmp(&b.1).unwrap()).unwrap();
    DiscreteDiracPoint { lambda_star: 0.5 * (lowest[i] + lowest[i + 1]), split, lowest }
}

/// Spectral gap between the first two bands of `a + delta b` on a uniform Brillouin-zone mesh.
///
/// Mesh sizes divisible by three contain the valley points, where the gap edges sit for small
/// `delta`. Returns `None` when the bands overlap.
pub fn discrete_gap(medium: &MediumSpec, n: usize, mesh: usize) -> Option<(f64, f64)> {
    use rayon::prelude::*;
    let cell = CellProblem::new(n, &|x| medium.a_signed(x, 1.0));
    let g = &medium.geometry;
    let points: Vec<Vec2> = (0..mesh)
        .flat_map(|i| (0..mesh).map(move |j| (i, j)))
        .map(|(i, j)| (i as f64 * g.e1s + j as f64 * g.e2s) / mesh as f64)
        .collect();
    let bands: Vec<Vec<f64>> = points.par_iter().map(|k| cell.eigenvalues(k, 2)).collect();
    let lo = bands.iter().map(|b| b[0]).fold(f64::NEG_INFINITY, f64::max);
    let hi = bands.iter().map(|b| b[1]).fold(f64::INFINITY, f64::min);
    (hi > lo).then_some((lo, hi))
}
