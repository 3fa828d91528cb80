//! Out-going Green function of the strip chain, reduced onto the column lines `Gamma_m`.
//!
//! Eliminating the interior columns of every cell leaves a block-tridiagonal chain in the
//! `Gamma` unknowns with symbol `Sigma(kappa) = Z0 - e^{i kappa} Z1 - e^{-i kappa} Z2`. The
//! lattice Green blocks `G_m = (1/2 pi) int_C1 e^{i kappa m} Sigma(kappa)^-1 dkappa` then give
//! the field of any source supported in one cell.

use crate::contour::ContourSpec;
use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::collections::HashMap;
use stripmodes::{AssemblyError, Factor, RawNode, StripOperator};
use thiserror::Error;

const NODE_CHUNK: usize = 16;

#[derive(Debug, Error)]
pub enum GreenError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("cell interior is nearly resonant at this lambda (pivot ratio {0:e})")]
    InteriorResonance(f64),
    #[error("singular symbol at contour node {0}")]
    FactorizationFailure(C64),
    #[error("cell offset {0} is outside the evaluated range")]
    OutOfRange(i64),
}

/// Sparse rows of a coupling block, indexed locally.
#[derive(Debug, Clone, Default)]
pub struct SparseRows {
    pub rows: Vec<Vec<(usize, C64)>>,
}

impl SparseRows {
    fn new(n: usize) -> Self {
        SparseRows { rows: vec![Vec::new(); n] }
    }

    /// `self * y` for dense `y`.
    pub fn mul(&self, y: &Mat<C64>) -> Mat<C64> {
        Mat::from_fn(self.rows.len(), y.ncols(), |i, j| self.rows[i].iter().map(|&(k, v)| v * y[(k, j)]).sum())
    }

    pub fn mul_vec(&self, y: &[C64]) -> Vec<C64> {
        self.rows.iter().map(|r| r.iter().map(|&(k, v)| v * y[k]).sum()).collect()
    }

    /// `self^T * x`.
    pub fn tmul_vec(&self, x: &[C64], ncols: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); ncols];
        for (i, r) in self.rows.iter().enumerate() {
            for &(k, v) in r {
                out[k] += v * x[i];
            }
        }
        out
    }

    /// Dense `self^T` with `ncols` rows.
    pub fn transpose_dense(&self, ncols: usize) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(ncols, self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            for &(k, v) in r {
                m[(k, i)] += v;
            }
        }
        m
    }
}

/// Cell-interior elimination at fixed `lambda`.
pub struct CellReduction {
    pub lambda: C64,
    /// Global unknowns on `Gamma` (column 0) and in the interior, in local order.
    pub gamma: Vec<usize>,
    pub interior: Vec<usize>,
    pub a_gg: Mat<C64>,
    /// `Gamma(m)` to interior of cell `m`.
    pub p: SparseRows,
    /// `Gamma(m)` to interior of cell `m - 1`.
    pub q: SparseRows,
    pub x: Factor,
    /// `X P^T` and `X Q^T`.
    pub xpt: Mat<C64>,
    pub xqt: Mat<C64>,
    pub z0: Mat<C64>,
    pub z1: Mat<C64>,
    pub z2: Mat<C64>,
    /// Smallest to largest diagonal of a probe solve, flags interior resonances.
    pub pivot_ratio: f64,
    /// `(K - lambda M)` restricted to the `Gamma` rows of the right neighbour column.
    pub a_right_gg: Mat<C64>,
}

impl CellReduction {
    pub fn new(op: &StripOperator, lambda: C64) -> Result<Self, GreenError> {
        let mesh = &op.mesh;
        let n = mesh.n;
        let gamma = mesh.column(0);
        let mut local = vec![(false, 0usize); mesh.len()];
        for (k, &g) in gamma.iter().enumerate() {
            local[g] = (true, k);
        }
        let interior: Vec<usize> = (0..mesh.len()).filter(|i| i % n != 0).collect();
        for (k, &g) in interior.iter().enumerate() {
            local[g] = (false, k);
        }
        let (ng, ni) = (gamma.len(), interior.len());
        let mut a_gg = Mat::<C64>::zeros(ng, ng);
        let mut p = SparseRows::new(ng);
        let mut q = SparseRows::new(ng);
        let mut ii = Vec::new();
        for c in &op.couplings {
            let v = C64::new(c.k, 0.0) - lambda * c.m;
            let (rg, rl) = local[c.row];
            let (cg, cl) = local[c.col];
            match (c.dcell, rg, cg) {
                (0, true, true) => a_gg[(rl, cl)] += v,
                (0, true, false) => p.rows[rl].push((cl, v)),
                (0, false, false) => ii.push((rl, cl, v)),
                (-1, true, false) => q.rows[rl].push((cl, v)),
                _ => {}
            }
        }
        let x = Factor::new(&stripmodes::Csr::from_entries(ni, ii))?;
        let xpt = x.solve_mat(&p.transpose_dense(ni));
        let xqt = x.solve_mat(&q.transpose_dense(ni));
        let pxpt = p.mul(&xpt);
        let qxqt = q.mul(&xqt);
        let z1 = p.mul(&xqt);
        let z2 = q.mul(&xpt);
        let z0 = Mat::from_fn(ng, ng, |i, j| a_gg[(i, j)] - pxpt[(i, j)] - qxqt[(i, j)]);
        // energy of X P^T relative to P^T flags near-resonant interiors
        let big = (0..ng).map(|j| (0..ni).map(|i| xpt[(i, j)].norm_sqr()).sum::<f64>()).fold(0.0, f64::max);
        let pivot_ratio = 1.0 / big.sqrt().max(1e-300);
        // stiffness of the column strip to the right of Gamma, for the one-sided conormal
        let a_right_gg = {
            let mut m = Mat::<C64>::zeros(ng, ng);
            let c = op.coef();
            let mut acc: HashMap<(usize, usize), C64> = HashMap::new();
            for j in (-mesh.j_max() - 1)..mesh.j_max() {
                for shape in 0..2 {
                    let e = mesh.geom.element((1, j), shape, &c);
                    for a in 0..3 {
                        for b in 0..3 {
                            let (va, vb) = (e.verts[a], e.verts[b]);
                            if va.0 != 0 || vb.0 != 0 {
                                continue;
                            }
                            let (Some(ra), Some(rb)) = (mesh.row_index(va.1), mesh.row_index(vb.1)) else { continue };
                            *acc.entry((ra, rb)).or_default() += C64::new(e.k[a][b], 0.0) - lambda * e.m[a][b];
                        }
                    }
                }
            }
            for ((a, b), v) in acc {
                m[(a, b)] = v;
            }
            m
        };
        Ok(CellReduction { lambda, gamma, interior, a_gg, p, q, x, xpt, xqt, z0, z1, z2, pivot_ratio, a_right_gg })
    }

    pub fn symbol(&self, kappa: C64) -> Mat<C64> {
        let (e, ei) = ((C64::i() * kappa).exp(), (-C64::i() * kappa).exp());
        Mat::from_fn(self.z0.nrows(), self.z0.ncols(), |i, j| self.z0[(i, j)] - e * self.z1[(i, j)] - ei * self.z2[(i, j)])
    }
}

/// Lattice Green blocks `G_m`, `|m| <= reach`, on one contour.
pub struct GreenEvaluator {
    pub reduction: CellReduction,
    pub contour: ContourSpec,
    pub reach: i64,
    blocks: Vec<Mat<C64>>,
    n: usize,
    rows: usize,
}

impl GreenEvaluator {
    pub fn build(op: &StripOperator, contour: ContourSpec, reach: i64) -> Result<Self, GreenError> {
        let reduction = CellReduction::new(op, contour.lambda)?;
        let ng = reduction.gamma.len();
        let width = (2 * reach + 1) as usize;
        // each task inverts the symbol once; a mirrored node reuses the transpose
        let n_nodes = contour.nodes.len();
        let tasks: Vec<(usize, Option<usize>)> = match &contour.mirror {
            Some(m) => (0..n_nodes).filter(|&k| m[k] >= k).map(|k| (k, (m[k] != k).then_some(m[k]))).collect(),
            None => (0..n_nodes).map(|k| (k, None)).collect(),
        };
        let add = |acc: &mut [Mat<C64>], inv: &Mat<C64>, z: C64, w: C64, transpose: bool| {
            let scale = w / (2.0 * std::f64::consts::PI);
            for (k, b) in acc.iter_mut().enumerate() {
                let f = scale * (C64::i() * z * (k as i64 - reach) as f64).exp();
                for j in 0..ng {
                    for i in 0..ng {
                        b[(i, j)] += f * if transpose { inv[(j, i)] } else { inv[(i, j)] };
                    }
                }
            }
        };
        // fixed chunks summed in order keep the reduction deterministic and the memory bounded
        let partial: Result<Vec<Vec<Mat<C64>>>, GreenError> = tasks
            .par_chunks(NODE_CHUNK)
            .map(|chunk| {
                let mut acc = vec![Mat::<C64>::zeros(ng, ng); width];
                for &(k, mirror) in chunk {
                    let z = contour.nodes[k];
                    let inv = reduction.symbol(z).partial_piv_lu().inverse();
                    if !inv.as_ref().norm_max().is_finite() {
                        return Err(GreenError::FactorizationFailure(z));
                    }
                    add(&mut acc, &inv, z, contour.weights[k], false);
                    if let Some(j) = mirror {
                        add(&mut acc, &inv, contour.nodes[j], contour.weights[j], true);
                    }
                }
                Ok(acc)
            })
            .collect();
        let mut blocks = vec![Mat::<C64>::zeros(ng, ng); width];
        for chunk in partial? {
            for (b, c) in blocks.iter_mut().zip(chunk) {
                *b += c;
            }
        }
        Ok(GreenEvaluator { reduction, contour, reach, blocks, n: op.mesh.n, rows: op.mesh.rows() })
    }

    pub fn lambda(&self) -> C64 {
        self.contour.lambda
    }

    /// `G_m` on `Gamma`.
    pub fn block(&self, m: i64) -> Result<&Mat<C64>, GreenError> {
        if m.abs() > self.reach {
            return Err(GreenError::OutOfRange(m));
        }
        Ok(&self.blocks[(m + self.reach) as usize])
    }

    /// Field of a source given as a weak load on the cell-0 unknowns, on cells `|m| < reach`.
    pub fn apply(&self, source: &[C64]) -> Result<CellField, GreenError> {
        let r = &self.reduction;
        let s_g: Vec<C64> = r.gamma.iter().map(|&g| source[g]).collect();
        let s_i: Vec<C64> = r.interior.iter().map(|&g| source[g]).collect();
        let xs = r.x.solve(&s_i);
        let r0: Vec<C64> = s_g.iter().zip(r.p.mul_vec(&xs)).map(|(a, b)| a - b).collect();
        let r1: Vec<C64> = r.q.mul_vec(&xs).iter().map(|b| -b).collect();
        let lo = -self.reach + 1;
        let hi = self.reach - 1;
        let mut ug: HashMap<i64, Vec<C64>> = HashMap::new();
        for m in lo..=hi + 1 {
            let a = matvec(self.block(m)?, &r0);
            let b = matvec(self.block(m - 1)?, &r1);
            ug.insert(m, a.iter().zip(&b).map(|(x, y)| x + y).collect());
        }
        let mut cells = Vec::new();
        for m in lo..=hi {
            let g0 = &ug[&m];
            let g1 = &ug[&(m + 1)];
            let pt = r.p.tmul_vec(g0, r.interior.len());
            let qt = r.q.tmul_vec(g1, r.interior.len());
            let mut rhs: Vec<C64> = pt.iter().zip(&qt).map(|(a, b)| -(a + b)).collect();
            if m == 0 {
                rhs.iter_mut().zip(&s_i).for_each(|(a, b)| *a += b);
            }
            let ui = r.x.solve(&rhs);
            let mut full = vec![C64::new(0.0, 0.0); source.len()];
            for (k, &g) in r.gamma.iter().enumerate() {
                full[g] = g0[k];
            }
            for (k, &g) in r.interior.iter().enumerate() {
                full[g] = ui[k];
            }
            cells.push(full);
        }
        Ok(CellField { first: lo, cells, n: self.n, rows: self.rows })
    }

    /// Field of a unit weak load at the raw node `y`.
    pub fn point_source(&self, op: &StripOperator, y: RawNode) -> Result<(i64, CellField), GreenError> {
        let (cell, idx) = op.mesh.locate(y).ok_or(GreenError::OutOfRange(0))?;
        let mut s = vec![C64::new(0.0, 0.0); op.mesh.len()];
        s[idx] = C64::new(1.0, 0.0);
        Ok((cell, self.apply(&s)?))
    }

    /// `G(x, y)` between raw nodes, by translation to a source in cell 0.
    pub fn kernel(&self, op: &StripOperator, x: RawNode, y: RawNode) -> Result<C64, GreenError> {
        let (cell, f) = self.point_source(op, y)?;
        let n = self.n as i64;
        f.value(op, (x.0 - cell * n, x.1)).ok_or(GreenError::OutOfRange(x.0.div_euclid(n) - cell))
    }
}

fn matvec(a: &Mat<C64>, x: &[C64]) -> Vec<C64> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum()).collect()
}

/// Field on consecutive cells `first, first + 1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    pub first: i64,
    pub cells: Vec<Vec<C64>>,
    n: usize,
    rows: usize,
}

impl CellField {
    pub fn cell(&self, m: i64) -> Option<&Vec<C64>> {
        let k = m - self.first;
        (k >= 0).then(|| self.cells.get(k as usize)).flatten()
    }

    pub fn last(&self) -> i64 {
        self.first + self.cells.len() as i64 - 1
    }

    pub fn value(&self, op: &StripOperator, p: RawNode) -> Option<C64> {
        match op.mesh.locate(p) {
            None => Some(C64::new(0.0, 0.0)),
            Some((cell, idx)) => self.cell(cell).map(|c| c[idx]),
        }
    }

    pub fn scaled(&self, s: C64) -> CellField {
        CellField { first: self.first, cells: self.cells.iter().map(|c| c.iter().map(|v| v * s).collect()).collect(), n: self.n, rows: self.rows }
    }

    /// The same field translated by `by` cells.
    pub fn shifted(mut self, by: i64) -> CellField {
        self.first += by;
        self
    }

    /// `a self + b other` on the cells both fields cover.
    pub fn combine(&self, a: C64, other: &CellField, b: C64) -> CellField {
        let lo = self.first.max(other.first);
        let hi = self.last().min(other.last());
        let cells = (lo..=hi)
            .map(|m| self.cell(m).unwrap().iter().zip(other.cell(m).unwrap()).map(|(x, y)| a * x + b * y).collect())
            .collect();
        CellField { first: lo, cells, n: self.n, rows: self.rows }
    }

    /// `max |(A u - f)|` over the cells whose neighbours are all present, relative to `max |f|`
    /// plus the size of `A u` term by term.
    pub fn residual(&self, op: &StripOperator, lambda: C64, source: &[C64]) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = source.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for m in self.first + 1..self.last() {
            let mut r = vec![C64::new(0.0, 0.0); source.len()];
            for c in &op.couplings {
                let v = (C64::new(c.k, 0.0) - lambda * c.m) * self.cell(m + c.dcell).unwrap()[c.col];
                scale = scale.max(v.norm());
                r[c.row] += v;
            }
            if m == 0 {
                r.iter_mut().zip(source).for_each(|(a, b)| *a -= b);
            }
            worst = worst.max(r.iter().map(|v| v.norm()).fold(0.0, f64::max));
        }
        worst / scale
    }
}
