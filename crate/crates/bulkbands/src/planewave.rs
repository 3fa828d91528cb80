//! Plane-wave discretisation of `-div(a grad u) = lambda u` on quasi-periodic cell functions.

use faer::{c64, Mat, Side};
use lattice::fourier::{g_index, g_vector, CoefficientModel, Field, GIndex, TruncationSet};
use lattice::{MediumSpec, SymmetryOp, Vec2};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BandError {
    #[error("eigensolver failed to converge")]
    Eigen,
    #[error("assembled operator is not Hermitian (defect {0:e})")]
    NonHermitian(f64),
    #[error("eigen residual {0:e} above tolerance")]
    Residual(f64),
    #[error("bands 1 and 2 at K are split by {gap:e} (tolerance {tol:e})")]
    NoDiracPoint { gap: f64, tol: f64 },
    #[error("no common gap around the Dirac energy (width {0:e})")]
    GapClosed(f64),
    #[error("truncation: {0}")]
    Truncation(#[from] lattice::FourierError),
    #[error("requested {0} bands from a basis of {1}")]
    TooManyBands(usize, usize),
}

/// Which bulk operator: `a` (`0`), `a + delta b` (`+1`) or `a - delta b` (`-1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeltaSign {
    Minus,
    Zero,
    Plus,
}

impl DeltaSign {
    pub fn value(self) -> f64 {
        match self {
            DeltaSign::Minus => -1.0,
            DeltaSign::Zero => 0.0,
            DeltaSign::Plus => 1.0,
        }
    }
}

/// Eigenpairs at one quasi-momentum. Coefficient vectors are unit vectors, which is the
/// cell-average inner product `|Y|^-1 (u, v)_{L2(Y)}` in this basis.
#[derive(Debug, Clone)]
pub struct BlochBandResult {
    pub kappa: Vec2,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<c64>>,
    pub basis: TruncationSet,
}

/// Shared plane-wave machinery: coefficient cache and cutoff.
#[derive(Debug, Clone)]
pub struct PlaneWaveSolver {
    pub medium: MediumSpec,
    pub gmax: f64,
    coeffs: HashMap<GIndex, (c64, c64)>,
}

impl PlaneWaveSolver {
    /// `shells` is the cutoff in units of `|e1s|`.
    pub fn new(medium: &MediumSpec, shells: f64) -> Self {
        let g = &medium.geometry;
        let gmax = shells * g.e1s.norm();
        let model = CoefficientModel::new(medium);
        // differences of basis vectors stay inside twice the cutoff
        let set = TruncationSet::centred(g, 2.0 * gmax + 1e-9).expect("positive cutoff");
        let coeffs = set
            .indices
            .iter()
            .map(|&m| (m, (model.coefficient(Field::A, m), model.coefficient(Field::B, m))))
            .collect();
        PlaneWaveSolver { medium: medium.clone(), gmax, coeffs }
    }

    pub fn basis(&self, kappa: Vec2) -> Result<TruncationSet, BandError> {
        Ok(TruncationSet::around(&self.medium.geometry, kappa, self.gmax)?)
    }

    fn coeff(&self, m: GIndex) -> (c64, c64) {
        self.coeffs.get(&m).copied().unwrap_or((c64::new(0.0, 0.0), c64::new(0.0, 0.0)))
    }

    /// `A_{G,G'} = g^(G - G') (kappa + G).(kappa + G')` for `g = weight_a a + weight_b b`.
    pub fn assemble(&self, basis: &TruncationSet, weight_a: f64, weight_b: f64) -> Mat<c64> {
        let geom = &self.medium.geometry;
        let q: Vec<Vec2> = basis.indices.iter().map(|&m| basis.kappa + g_vector(geom, m)).collect();
        let n = basis.len();
        Mat::from_fn(n, n, |i, j| {
            let (mi, mj) = (basis.indices[i], basis.indices[j]);
            let (a, b) = self.coeff((mi.0 - mj.0, mi.1 - mj.1));
            let c = a * weight_a + b * weight_b;
            c * q[i].dot(&q[j])
        })
    }

    pub fn operator(&self, basis: &TruncationSet, sign: DeltaSign) -> Mat<c64> {
        let d = self.medium.params.delta * sign.value();
        self.assemble(basis, 1.0, d)
    }

    pub fn solve(&self, kappa: Vec2, nbands: usize, sign: DeltaSign) -> Result<BlochBandResult, BandError> {
        let basis = self.basis(kappa)?;
        let a = self.operator(&basis, sign);
        solve_hermitian(a, basis, nbands)
    }

    /// Quadratic form `c1^H A_b c2` of the perturbation at the basis momentum.
    pub fn perturbation_form(&self, basis: &TruncationSet, c1: &[c64], c2: &[c64]) -> c64 {
        let b = self.assemble(basis, 0.0, 1.0);
        quadratic_form(&b, c1, c2)
    }
}

pub fn quadratic_form(m: &Mat<c64>, c1: &[c64], c2: &[c64]) -> c64 {
    let mut s = c64::new(0.0, 0.0);
    for i in 0..m.nrows() {
        let mut row = c64::new(0.0, 0.0);
        for j in 0..m.ncols() {
            row += m[(i, j)] * c2[j];
        }
        s += c1[i].conj() * row;
    }
    s
}

pub fn hermitian_defect(a: &Mat<c64>) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..=i {
            d = d.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    d
}

fn frobenius(a: &Mat<c64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

fn solve_hermitian(a: Mat<c64>, basis: TruncationSet, nbands: usize) -> Result<BlochBandResult, BandError> {
    let n = a.nrows();
    if nbands > n {
        return Err(BandError::TooManyBands(nbands, n));
    }
    let norm = frobenius(&a);
    let defect = hermitian_defect(&a);
    if defect > 1e-12 * norm.max(1.0) {
        return Err(BandError::NonHermitian(defect));
    }
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|_| BandError::Eigen)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut eigenvalues = Vec::with_capacity(nbands);
    let mut eigenvectors = Vec::with_capacity(nbands);
    for k in 0..nbands {
        let lam = s[k].re;
        let v: Vec<c64> = (0..n).map(|i| u[(i, k)]).collect();
        let mut res: f64 = 0.0;
        for i in 0..n {
            let mut r = -v[i] * lam;
            for j in 0..n {
                r += a[(i, j)] * v[j];
            }
            res += r.norm_sqr();
        }
        let res = res.sqrt();
        if res > 1e-8 * norm {
            return Err(BandError::Residual(res / norm));
        }
        eigenvalues.push(lam);
        eigenvectors.push(v);
    }
    Ok(BlochBandResult { kappa: basis.kappa, eigenvalues, eigenvectors, basis })
}

/// Action `(O u)(x) = u(O x)` on plane-wave coefficients; `None` if `O` does not fix the
/// quasi-momentum class or the basis is not closed.
pub fn symmetry_action(res: &BlochBandResult, geom: &lattice::LatticeGeometry, op: &SymmetryOp, c: &[c64]) -> Option<Vec<c64>> {
    // u(Ox) has momentum O^T (kappa + G); entry i of the result pulls from the preimage
    let inv = SymmetryOp { matrix: op.inverse(), tag: op.tag };
    let perm = res.basis.permutation(geom, &inv)?;
    let mut out = vec![c64::new(0.0, 0.0); c.len()];
    for (i, &j) in perm.iter().enumerate() {
        out[j] = c[i];
    }
    Some(out)
}

/// Conjugated inversion `(V C u)(x) = conj(u(-x))`, which leaves coefficients in place up to
/// conjugation.
pub fn inversion_conjugation(c: &[c64]) -> Vec<c64> {
    c.iter().map(|v| v.conj()).collect()
}

pub fn inner(c1: &[c64], c2: &[c64]) -> c64 {
    c1.iter().zip(c2).map(|(a, b)| a.conj() * b).sum()
}

/// Same momentum class check used by callers that fold.
pub fn basis_offset(geom: &lattice::LatticeGeometry, a: &Vec2, b: &Vec2) -> Option<GIndex> {
    g_index(geom, &(a - b))
}

/// Relative change of `lambda_1(K)` when the cutoff grows by one shell.
pub fn shell_change(medium: &MediumSpec, shells: f64) -> f64 {
    let k = medium.geometry.k;
    let lo = PlaneWaveSolver::new(medium, shells).solve(k, 1, DeltaSign::Zero);
    let hi = PlaneWaveSolver::new(medium, shells + 1.0).solve(k, 1, DeltaSign::Zero);
    match (lo, hi) {
        (Ok(lo), Ok(hi)) => (lo.eigenvalues[0] - hi.eigenvalues[0]).abs() / hi.eigenvalues[0].abs(),
        _ => f64::NAN,
    }
}
