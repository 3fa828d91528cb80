//! Equilateral triangulation in skewed strip coordinates `x = s e1 + t g`.
//!
//! Nodes sit at `(s, t) = (i / n, j / (3n))`. Every triangle spans rows `j..j+2` and columns
//! `i-1..i`, so the auxiliary line `s = 0` is a union of edges and the mesh is invariant under
//! the lattice rotation: node `(i, j)` maps to `(-2i - j, 3i + j)`.

use lattice::{build_geometry, LatticeGeometry, Vec2};

/// Triangles anchored at node `(i, j)`, as offsets `(di, dj)`.
pub const TRIANGLES: [[(i64, i64); 3]; 2] = [[(0, 0), (0, 1), (-1, 2)], [(0, 0), (-1, 1), (-1, 2)]];

/// Side length of the subdivision used for element-averaged coefficients.
const QUAD_SUBDIVISION: usize = 4;

/// Integer node of the infinite mesh, `col` counted across cells.
pub type RawNode = (i64, i64);

pub fn rotate_node(p: RawNode) -> RawNode {
    (-2 * p.0 - p.1, 3 * p.0 + p.1)
}

pub fn reflect_node(p: RawNode) -> RawNode {
    (-p.0 - p.1, p.1)
}

/// Linear element with precomputed stiffness (`a`-weighted) and consistent mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub verts: [RawNode; 3],
    pub k: [[f64; 3]; 3],
    pub m: [[f64; 3]; 3],
    pub abar: f64,
}

impl Element {
    /// Anchor column: the element lies between columns `anchor - 1` and `anchor`.
    pub fn anchor(&self) -> i64 {
        self.verts[0].0
    }

    pub fn translated(&self, dcol: i64) -> Element {
        let mut e = self.clone();
        for v in e.verts.iter_mut() {
            v.0 += dcol;
        }
        e
    }
}

#[derive(Debug, Clone)]
pub struct MeshGeometry {
    pub n: usize,
    pub lattice: LatticeGeometry,
    metric: [[f64; 2]; 2],
    det: f64,
    quad: Vec<(f64, f64)>,
}

impl MeshGeometry {
    pub fn new(n: usize) -> Self {
        let lattice = build_geometry();
        let c = lattice.strip_metric();
        let det = lattice.strip_map().determinant().abs();
        MeshGeometry { n, lattice, metric: [[c[(0, 0)], c[(0, 1)]], [c[(1, 0)], c[(1, 1)]]], det, quad: subdivided_centroids(QUAD_SUBDIVISION) }
    }

    pub fn st(&self, p: RawNode) -> (f64, f64) {
        let n = self.n as f64;
        (p.0 as f64 / n, p.1 as f64 / (3.0 * n))
    }

    pub fn point(&self, p: RawNode) -> Vec2 {
        let (s, t) = self.st(p);
        self.lattice.from_strip(s, t)
    }

    /// Element anchored at `p` of the given shape, for the coefficient `coef`.
    pub fn element(&self, p: RawNode, shape: usize, coef: &dyn Fn(&Vec2) -> f64) -> Element {
        let verts = TRIANGLES[shape].map(|(di, dj)| (p.0 + di, p.1 + dj));
        let st = verts.map(|v| self.st(v));
        let j = [[st[1].0 - st[0].0, st[2].0 - st[0].0], [st[1].1 - st[0].1, st[2].1 - st[0].1]];
        let detj = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let area = 0.5 * detj.abs();
        let mut abar = 0.0;
        for &(xi, eta) in &self.quad {
            let s = st[0].0 + j[0][0] * xi + j[0][1] * eta;
            let t = st[0].1 + j[1][0] * xi + j[1][1] * eta;
            abar += coef(&self.lattice.from_strip(s, t));
        }
        abar /= self.quad.len() as f64;
        // gradients of the barycentric functions in (s, t): J^-T [[-1, 1, 0], [-1, 0, 1]]
        let inv = [[j[1][1] / detj, -j[0][1] / detj], [-j[1][0] / detj, j[0][0] / detj]];
        let mut gr = [[0.0; 3]; 2];
        let refg = [[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]];
        for c in 0..3 {
            for r in 0..2 {
                gr[r][c] = inv[0][r] * refg[0][c] + inv[1][r] * refg[1][c];
            }
        }
        let c = &self.metric;
        let w = abar * area * self.det;
        let mut k = [[0.0; 3]; 3];
        let mut m = [[0.0; 3]; 3];
        for p in 0..3 {
            for q in 0..3 {
                let mut v = 0.0;
                for r in 0..2 {
                    for s in 0..2 {
                        v += gr[r][p] * c[r][s] * gr[s][q];
                    }
                }
                k[p][q] = w * v;
                m[p][q] = area * self.det * if p == q { 2.0 } else { 1.0 } / 12.0;
            }
        }
        Element { verts, k, m, abar }
    }
}

/// Centroids of the `m^2` congruent sub-triangles of the reference triangle.
fn subdivided_centroids(m: usize) -> Vec<(f64, f64)> {
    let mf = m as f64;
    let mut pts = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m - i {
            pts.push(((i as f64 + 1.0 / 3.0) / mf, (j as f64 + 1.0 / 3.0) / mf));
            if i + j + 1 < m {
                pts.push(((i as f64 + 2.0 / 3.0) / mf, (j as f64 + 2.0 / 3.0) / mf));
            }
        }
    }
    pts
}

/// Strip `t in [-T, T]` with homogeneous Dirichlet data on rows `|j| >= 3nT`.
#[derive(Debug, Clone)]
pub struct StripMesh {
    pub geom: MeshGeometry,
    pub n: usize,
    pub t_cells: usize,
}

impl StripMesh {
    pub fn new(n: usize, t_cells: usize) -> Self {
        StripMesh { geom: MeshGeometry::new(n), n, t_cells }
    }

    /// First Dirichlet row.
    pub fn j_max(&self) -> i64 {
        (3 * self.n * self.t_cells) as i64
    }

    /// Unknown rows per column, `|j| <= j_max - 1`.
    pub fn rows(&self) -> usize {
        (2 * self.j_max() - 1) as usize
    }

    pub fn len(&self) -> usize {
        self.rows() * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row_index(&self, j: i64) -> Option<usize> {
        let jm = self.j_max();
        (j.abs() < jm).then(|| (j + jm - 1) as usize)
    }

    pub fn row_of(&self, r: usize) -> i64 {
        r as i64 - self.j_max() + 1
    }

    /// Unknown index in cell 0; rows outer so the matrices stay narrow-banded.
    pub fn index(&self, i: usize, r: usize) -> usize {
        r * self.n + i
    }

    /// Cell offset and cell-0 unknown of a raw node, `None` on Dirichlet rows.
    pub fn locate(&self, p: RawNode) -> Option<(i64, usize)> {
        let r = self.row_index(p.1)?;
        let n = self.n as i64;
        let cell = p.0.div_euclid(n);
        Some((cell, self.index(p.0.rem_euclid(n) as usize, r)))
    }

    pub fn raw(&self, idx: usize) -> RawNode {
        ((idx % self.n) as i64, self.row_of(idx / self.n))
    }

    /// Unknowns on the column line `i = col` of cell 0, ordered by row.
    pub fn column(&self, col: usize) -> Vec<usize> {
        (0..self.rows()).map(|r| self.index(col, r)).collect()
    }

    /// All elements of cell 0 that touch an unknown.
    pub fn elements(&self, coef: &(dyn Fn(&Vec2) -> f64 + Sync)) -> Vec<Element> {
        let jm = self.j_max();
        let mut out = Vec::new();
        for j in (-jm - 1)..jm {
            for i in 0..self.n as i64 {
                for shape in 0..2 {
                    let e = self.geom.element((i, j), shape, coef);
                    if e.verts.iter().any(|v| v.1.abs() < jm) {
                        out.push(e);
                    }
                }
            }
        }
        out
    }

    /// Value of a Bloch field at a raw node, zero on and beyond the Dirichlet rows.
    pub fn bloch_value(&self, u: &[num_complex::Complex64], kappa: num_complex::Complex64, p: RawNode) -> num_complex::Complex64 {
        match self.locate(p) {
            Some((cell, idx)) => u[idx] * (num_complex::Complex64::i() * kappa * cell as f64).exp(),
            None => num_complex::Complex64::new(0.0, 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_has_sixteen_points_with_unit_mean() {
        let q = subdivided_centroids(4);
        assert_eq!(q.len(), 16);
        let cx: f64 = q.iter().map(|p| p.0).sum::<f64>() / 16.0;
        assert!((cx - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn element_mass_sums_to_physical_area() {
        let g = MeshGeometry::new(8);
        let e = g.element((3, 5), 0, &|_| 1.0);
        let total: f64 = e.m.iter().flatten().sum();
        // cell area / (2 n * 3n) triangles
        let expect = 3f64.sqrt() / 2.0 / (2.0 * 8.0 * 24.0);
        assert!((total - expect).abs() < 1e-15);
        // constants are in the stiffness kernel
        for row in e.k {
            assert!(row.iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn node_maps_match_point_symmetries() {
        let g = MeshGeometry::new(8);
        let r = lattice::SymmetryOp::rotation();
        let f = lattice::SymmetryOp::reflection();
        for p in [(0, 0), (3, -7), (-5, 11), (1, 2)] {
            assert!((g.point(rotate_node(p)) - r.apply(&g.point(p))).norm() < 1e-12);
            assert!((g.point(reflect_node(p)) - f.apply(&g.point(p))).norm() < 1e-12);
        }
    }

    #[test]
    fn triangles_map_to_triangles_under_rotation() {
        let g = MeshGeometry::new(4);
        let shapes: Vec<[RawNode; 3]> = (0..2).map(|s| g.element((0, 0), s, &|_| 1.0).verts).collect();
        let canon = |mut v: [RawNode; 3]| {
            v.sort();
            let a = v[0];
            v.map(|p| (p.0 - a.0, p.1 - a.1))
        };
        let known: Vec<_> = shapes.iter().map(|v| canon(*v)).collect();
        for v in &shapes {
            assert!(known.contains(&canon(v.map(rotate_node))));
            assert!(known.contains(&canon(v.map(reflect_node))));
        }
    }

    #[test]
    fn strip_counts() {
        let m = StripMesh::new(8, 8);
        assert_eq!(m.rows(), 383);
        assert_eq!(m.len(), 3064);
        assert_eq!(m.locate((-1, 0)), Some((-1, m.index(7, m.row_index(0).unwrap()))));
        assert_eq!(m.locate((0, 192)), None);
    }
}
