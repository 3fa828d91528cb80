//! Single-layer, double-layer and Neumann-Poincare operators on the truncated line `Gamma`.
//!
//! Densities are nodal samples on the window rows, traces are nodal values, and the duality
//! pairing is `<a, b> = b^H M a` with the line mass matrix `M`. Densities outside the window
//! are zero, so their load on the full line is `M[:, W] a`.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use num_complex::Complex64 as C64;
use outgreen::{CellField, GreenError, GreenEvaluator};
use stripmodes::{mode_trace, BandTableError, InterfaceMode, StripOperator};
use thiserror::Error;

/// Relative jump residual above which assembly is rejected.
pub const JUMP_TOLERANCE: f64 = 0.05;

#[derive(Debug, Error)]
pub enum LayerError {
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Contour(#[from] outgreen::ContourError),
    #[error(transparent)]
    Band(#[from] BandTableError),
    #[error("discrete jump residual {0:e} is above tolerance")]
    JumpViolation(f64),
    #[error("S is nearly singular at lambda = {lambda} (sigma ratio {ratio:e})")]
    NearSingularS { lambda: f64, ratio: f64 },
    #[error("{operator} is nearly singular at lambda = {lambda} (sigma ratio {ratio:e})")]
    ExceptionalFrequency { lambda: f64, operator: &'static str, ratio: f64 },
    #[error("both coefficients of the scalar equation vanish")]
    DegenerateSystem,
    #[error("singular value decomposition failed")]
    Svd,
}

pub(crate) fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub(crate) fn half_identity(n: usize) -> Mat<C64> {
    Mat::from_fn(n, n, |i, j| if i == j { C64::new(0.5, 0.0) } else { zero() })
}

pub(crate) fn matvec(a: &Mat<C64>, x: &[C64]) -> Vec<C64> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum()).collect()
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn axpy(a: C64, x: &[C64], b: C64, y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(p, q)| a * p + b * q).collect()
}

/// P1 mass matrix of the full line `Gamma` (all unknown rows), arc-length weighted.
pub fn line_mass(op: &StripOperator) -> Mat<C64> {
    let mesh = &op.mesh;
    let g = mesh.geom.point((0, 3 * mesh.n as i64));
    let h = g.norm() / (3.0 * mesh.n as f64);
    let rows = mesh.rows();
    Mat::from_fn(rows, rows, |i, j| match i.abs_diff(j) {
        0 => C64::new(2.0 * h / 3.0, 0.0),
        1 => C64::new(h / 6.0, 0.0),
        _ => zero(),
    })
}

/// Tikhonov-regularized inverse through the singular value decomposition.
#[derive(Debug, Clone)]
pub struct RegularizedInverse {
    u: Mat<C64>,
    v: Mat<C64>,
    sigma: Vec<f64>,
    tau: f64,
}

impl RegularizedInverse {
    pub fn new(a: &Mat<C64>, relative_tau: f64) -> Result<Self, LayerError> {
        let svd = a.svd().map_err(|_| LayerError::Svd)?;
        let sigma: Vec<f64> = svd.S().column_vector().iter().map(|s| s.re).collect();
        let smax = sigma.iter().cloned().fold(0.0, f64::max);
        Ok(RegularizedInverse { u: svd.U().to_owned(), v: svd.V().to_owned(), sigma, tau: relative_tau * smax })
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.iter().cloned().fold(0.0, f64::max)
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `sigma_min / sigma_max`.
    pub fn ratio(&self) -> f64 {
        self.sigma_min() / self.sigma_max()
    }

    /// Right singular vector of the smallest singular value.
    pub fn null_vector(&self) -> Vec<C64> {
        let k = (0..self.sigma.len()).min_by(|&a, &b| self.sigma[a].partial_cmp(&self.sigma[b]).unwrap()).unwrap();
        (0..self.v.nrows()).map(|i| self.v[(i, k)]).collect()
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.v.nrows();
        let mut x = vec![zero(); n];
        for (k, &s) in self.sigma.iter().enumerate() {
            let c: C64 = (0..self.u.nrows()).map(|i| self.u[(i, k)].conj() * b[i]).sum();
            let f = s / (s * s + self.tau * self.tau);
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += f * c * self.v[(i, k)];
            }
        }
        x
    }
}

/// `S`, `K`, `K*`, `N` of the out-going Green function on the window `|t| <= L` of `Gamma`.
#[derive(Debug, Clone)]
pub struct BoundaryOperatorSet {
    pub lambda: C64,
    pub half_width: f64,
    /// Row indices of `Gamma` kept in the window.
    pub rows: Vec<usize>,
    /// `t` of each window sample.
    pub t: Vec<f64>,
    /// Line mass matrix on the window, defining the pairing.
    pub mass: Mat<C64>,
    /// `M[:, W]` on the full line, lifting window densities to loads.
    pub lift: Mat<C64>,
    pub s: Mat<C64>,
    pub k: Mat<C64>,
    pub kstar: Mat<C64>,
    pub n: Mat<C64>,
    /// Relative single-layer jump residual measured at assembly.
    pub jump_residual: f64,
}

/// Full-line blocks shared by the operators and the potentials.
pub(crate) struct LineBlocks {
    pub a_left: Mat<C64>,
    pub r0: Mat<C64>,
    pub l0: Mat<C64>,
}

pub(crate) fn line_blocks(g: &GreenEvaluator) -> LineBlocks {
    let r = &g.reduction;
    let pxpt = r.p.mul(&r.xpt);
    let qxqt = r.q.mul(&r.xqt);
    let a_left = &r.a_gg - &r.a_right_gg;
    let r0 = &r.a_right_gg - &pxpt;
    let l0 = &a_left - &qxqt;
    LineBlocks { a_left, r0, l0 }
}

fn window_rows(op: &StripOperator, half_width: f64) -> Vec<usize> {
    let mesh = &op.mesh;
    let per = 3.0 * mesh.n as f64;
    (0..mesh.rows()).filter(|&r| (mesh.row_of(r) as f64 / per).abs() <= half_width + 1e-12).collect()
}

fn restrict(a: &Mat<C64>, rows: &[usize], cols: &[usize]) -> Mat<C64> {
    Mat::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

/// Assembles the operator set from the Green blocks `G_{-1}, ..., G_2`.
///
/// `K = 1/2 - G_0 R_0 + G_{-1} Z_2` and `K* = 1/2 - R_0 G_0 + Z_1 G_1` with `R_0` the
/// right-side Schur block; `N` is the right conormal of the double layer. The single-layer
/// jump is then measured on the Green field itself and must be below `JUMP_TOLERANCE`.
pub fn assemble_operators(g: &GreenEvaluator, op: &StripOperator, half_width: f64) -> Result<BoundaryOperatorSet, LayerError> {
    let r = &g.reduction;
    let ng = r.gamma.len();
    let (g0, g1, gm1, g2) = (g.block(0)?, g.block(1)?, g.block(-1)?, g.block(2)?);
    let b = line_blocks(g);
    let half = half_identity(ng);
    let k_full = &(&half - &(g0 * &b.r0)) + &(gm1 * &r.z2);
    let ks_fun = &(&half - &(&b.r0 * g0)) + &(&r.z1 * g1);
    let trace0 = &(g0 * &b.l0) - &(g1 * &r.z1);
    let trace1 = &(g1 * &b.l0) - &(g2 * &r.z1);
    let n_fun = &(&r.z1 * &trace1) - &(&b.r0 * &trace0);

    let rows = window_rows(op, half_width);
    let all: Vec<usize> = (0..ng).collect();
    let m_full = line_mass(op);
    let mass = restrict(&m_full, &rows, &rows);
    let lift = restrict(&m_full, &all, &rows);
    let minv = mass.partial_piv_lu().inverse();
    let s = &restrict(g0, &rows, &all) * &lift;
    let k = restrict(&k_full, &rows, &rows);
    let kstar = &minv * &(&restrict(&ks_fun, &rows, &all) * &lift);
    let n = &minv * &restrict(&n_fun, &rows, &rows);
    let per = 3.0 * op.mesh.n as f64;
    let t = rows.iter().map(|&i| op.mesh.row_of(i) as f64 / per).collect();
    let mut set = BoundaryOperatorSet {
        lambda: g.lambda(),
        half_width,
        rows,
        t,
        mass,
        lift,
        s,
        k,
        kstar,
        n,
        jump_residual: 0.0,
    };
    let jump = crate::checks::single_layer_jump(g, op, &set)?;
    if !(jump.jump < JUMP_TOLERANCE) {
        return Err(LayerError::JumpViolation(jump.jump));
    }
    set.jump_residual = jump.jump;
    Ok(set)
}

impl BoundaryOperatorSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `<a, b>_Gamma = b^H M a`.
    pub fn pairing(&self, a: &[C64], b: &[C64]) -> C64 {
        let ma = matvec(&self.mass, a);
        b.iter().zip(&ma).map(|(x, y)| x.conj() * y).sum()
    }

    /// Window density of a weak conormal functional given on all rows.
    pub fn density(&self, functional: &[C64]) -> Vec<C64> {
        let f: Vec<C64> = self.rows.iter().map(|&r| functional[r]).collect();
        let lu = self.mass.partial_piv_lu();
        use faer::linalg::solvers::Solve;
        let b = Mat::from_fn(f.len(), 1, |i, _| f[i]);
        let x = lu.solve(&b);
        (0..f.len()).map(|i| x[(i, 0)]).collect()
    }

    /// Restriction of a full-line vector to the window.
    pub fn window(&self, full: &[C64]) -> Vec<C64> {
        self.rows.iter().map(|&r| full[r]).collect()
    }

    /// Extension of a window vector by zero to all rows.
    pub fn extend(&self, w: &[C64], rows: usize) -> Vec<C64> {
        let mut out = vec![zero(); rows];
        for (k, &r) in self.rows.iter().enumerate() {
            out[r] = w[k];
        }
        out
    }

    /// Full-line load of a window density.
    pub fn load(&self, density: &[C64]) -> Vec<C64> {
        matvec(&self.lift, density)
    }

    pub fn s_inverse(&self, relative_tau: f64) -> Result<RegularizedInverse, LayerError> {
        RegularizedInverse::new(&self.s, relative_tau)
    }

    pub fn n_inverse(&self, relative_tau: f64) -> Result<RegularizedInverse, LayerError> {
        RegularizedInverse::new(&self.n, relative_tau)
    }
}

/// Trace and conormal density of a straight-interface mode on the window.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBoundaryData {
    pub kappa: f64,
    pub slope: f64,
    pub trace: Vec<C64>,
    pub density: Vec<C64>,
    /// Trace and conormal functional on all rows.
    pub full_trace: Vec<C64>,
    pub full_conormal: Vec<C64>,
}

pub fn mode_boundary_data(op: &StripOperator, ops: &BoundaryOperatorSet, m: &InterfaceMode) -> ModeBoundaryData {
    let tr = mode_trace(op, m, 0);
    ModeBoundaryData {
        kappa: m.kappa,
        slope: m.slope,
        trace: ops.window(&tr.values),
        density: ops.density(&tr.conormal),
        full_trace: tr.values,
        full_conormal: tr.conormal,
    }
}

/// Cell-0 load vector with `gamma` on the `Gamma` rows and `interior` on the interior unknowns.
pub(crate) fn cell_load(g: &GreenEvaluator, len: usize, gamma: Option<&[C64]>, interior: Option<&[C64]>) -> Vec<C64> {
    let r = &g.reduction;
    let mut s = vec![zero(); len];
    if let Some(v) = gamma {
        for (k, &i) in r.gamma.iter().enumerate() {
            s[i] = v[k];
        }
    }
    if let Some(v) = interior {
        for (k, &i) in r.interior.iter().enumerate() {
            s[i] = v[k];
        }
    }
    s
}

/// Single-layer field of a full-line load on `Gamma`.
pub fn single_layer_field(g: &GreenEvaluator, op: &StripOperator, load: &[C64]) -> Result<CellField, LayerError> {
    Ok(g.apply(&cell_load(g, op.mesh.len(), Some(load), None))?)
}

/// Double-layer field of full-line trace data `phi`: the Green field of the left-element load.
///
/// Its value on `Gamma` is the right trace; the left trace is that value minus `phi`.
pub fn double_layer_field(g: &GreenEvaluator, op: &StripOperator, phi: &[C64]) -> Result<CellField, LayerError> {
    let r = &g.reduction;
    let b = line_blocks(g);
    let on_gamma = matvec(&b.a_left, phi);
    let qt = r.q.tmul_vec(phi, r.interior.len());
    let a = g.apply(&cell_load(g, op.mesh.len(), Some(&on_gamma), None))?;
    // the column next to Gamma on the left belongs to cell -1
    let c = g.apply(&cell_load(g, op.mesh.len(), None, Some(&qt)))?.shifted(-1);
    let one = C64::new(1.0, 0.0);
    Ok(a.combine(one, &c, one))
}
