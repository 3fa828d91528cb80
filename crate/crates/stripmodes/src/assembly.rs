//! Quasi-periodic assembly of `a(u, v) - lambda m(u, v)` on the strip mesh.

use crate::coefficient::Coefficient;
use crate::mesh::{Element, RawNode, StripMesh};
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use lattice::{MediumSpec, Vec2};
use num_complex::Complex64 as C64;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
}

/// Coupling between unknown `row` of cell 0 and unknown `col` of cell `dcell`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub row: usize,
    pub col: usize,
    pub dcell: i64,
    pub k: f64,
    pub m: f64,
}

/// Element data of one cell of the strip; all Bloch assemblies are built from it.
#[derive(Debug, Clone)]
pub struct StripOperator {
    pub mesh: StripMesh,
    pub medium: MediumSpec,
    pub coefficient: Coefficient,
    pub elements: Vec<Element>,
    pub couplings: Vec<Coupling>,
}

impl StripOperator {
    pub fn new(medium: &MediumSpec, coefficient: Coefficient, n: usize, t_cells: usize) -> Self {
        let mesh = StripMesh::new(n, t_cells);
        let elements = mesh.elements(&coefficient.closure(medium));
        let mut acc: HashMap<(usize, usize, i64), (f64, f64)> = HashMap::new();
        for e in &elements {
            let loc = e.verts.map(|v| mesh.locate(v));
            for p in 0..3 {
                let Some((cp, ip)) = loc[p] else { continue };
                for q in 0..3 {
                    let Some((cq, iq)) = loc[q] else { continue };
                    let x = acc.entry((ip, iq, cq - cp)).or_insert((0.0, 0.0));
                    x.0 += e.k[p][q];
                    x.1 += e.m[p][q];
                }
            }
        }
        let mut couplings: Vec<Coupling> =
            acc.into_iter().map(|((row, col, dcell), (k, m))| Coupling { row, col, dcell, k, m }).collect();
        couplings.sort_by_key(|c| (c.dcell, c.col, c.row));
        StripOperator { mesh, medium: medium.clone(), coefficient, elements, couplings }
    }

    /// Operator for the straight-interface coefficient `a^E`.
    pub fn interface(medium: &MediumSpec, n: usize, t_cells: usize) -> Self {
        Self::new(medium, Coefficient::Interface, n, t_cells)
    }

    pub fn coef(&self) -> impl Fn(&Vec2) -> f64 + Sync + '_ {
        self.coefficient.closure(&self.medium)
    }

    pub fn len(&self) -> usize {
        self.mesh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.is_empty()
    }

    /// Stiffness and mass at quasi-momentum `kappa`; Hermitian for real `kappa`.
    pub fn assemble(&self, kappa: C64) -> StripDiscretization {
        let phase = |d: i64| (C64::i() * kappa * d as f64).exp();
        let ph = [phase(-1), C64::new(1.0, 0.0), phase(1)];
        let k = self.couplings.iter().map(|c| (c.row, c.col, ph[(c.dcell + 1) as usize] * c.k)).collect();
        let m = self.couplings.iter().map(|c| (c.row, c.col, ph[(c.dcell + 1) as usize] * c.m)).collect();
        StripDiscretization { kappa, n: self.len(), k: Csr::from_entries(self.len(), k), m: Csr::from_entries(self.len(), m) }
    }

    /// `d/dkappa (K - lambda M)` at `kappa`.
    pub fn kappa_derivative(&self, kappa: C64, lambda: C64) -> Csr {
        let e = self
            .couplings
            .iter()
            .filter(|c| c.dcell != 0)
            .map(|c| {
                let d = c.dcell as f64;
                (c.row, c.col, C64::i() * d * (C64::i() * kappa * d).exp() * (c.k - lambda * c.m))
            })
            .collect();
        Csr::from_entries(self.len(), e)
    }

    /// Group velocity `u^H (dK - lambda dM) u` of an `M`-normalized eigenpair.
    pub fn hellmann_feynman(&self, kappa: f64, lambda: f64, u: &[C64]) -> f64 {
        let dk = self.kappa_derivative(C64::new(kappa, 0.0), C64::new(lambda, 0.0));
        dot(u, &dk.apply(u)).re
    }
}

/// Compressed sparse rows, used for products; factorizations go through faer.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub ptr: Vec<usize>,
    pub idx: Vec<usize>,
    pub val: Vec<C64>,
}

impl Csr {
    pub fn from_entries(n: usize, mut e: Vec<(usize, usize, C64)>) -> Self {
        e.sort_by_key(|x| (x.0, x.1));
        let mut ptr = vec![0; n + 1];
        let mut idx = Vec::with_capacity(e.len());
        let mut val: Vec<C64> = Vec::with_capacity(e.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in e {
            if last == Some((r, c)) {
                *val.last_mut().unwrap() += v;
            } else {
                idx.push(c);
                val.push(v);
                last = Some((r, c));
            }
            ptr[r + 1] = idx.len();
        }
        for r in 0..n {
            ptr[r + 1] = ptr[r + 1].max(ptr[r]);
        }
        Csr { n, ptr, idx, val }
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        (self.ptr[r]..self.ptr[r + 1]).find(|&p| self.idx[p] == c).map_or(C64::new(0.0, 0.0), |p| self.val[p])
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|r| (self.ptr[r]..self.ptr[r + 1]).map(|p| self.val[p] * x[self.idx[p]]).sum())
            .collect()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |r| (self.ptr[r]..self.ptr[r + 1]).map(move |p| (r, self.idx[p], self.val[p])))
    }

    /// `max |A - A^H|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.triplets().map(|(r, c, v)| (v - self.get(c, r).conj()).norm()).fold(0.0, f64::max)
    }

    /// `self + s * other` on the union of patterns.
    pub fn axpy(&self, s: C64, other: &Csr) -> Csr {
        let e = self.triplets().chain(other.triplets().map(|(r, c, v)| (r, c, s * v))).collect();
        Csr::from_entries(self.n, e)
    }

    pub fn to_faer(&self) -> SparseColMat<usize, C64> {
        let t: Vec<_> = self.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        SparseColMat::try_new_from_triplets(self.n, self.n, &t).expect("valid sparse pattern")
    }
}

/// Quasi-periodic matrices of the strip at one `kappa`.
#[derive(Debug, Clone)]
pub struct StripDiscretization {
    pub kappa: C64,
    pub n: usize,
    pub k: Csr,
    pub m: Csr,
}

impl StripDiscretization {
    pub fn pencil(&self, lambda: C64) -> Csr {
        self.k.axpy(-lambda, &self.m)
    }

    pub fn factor(&self, lambda: C64) -> Result<Factor, AssemblyError> {
        Factor::new(&self.pencil(lambda))
    }

    pub fn m_inner(&self, u: &[C64], v: &[C64]) -> C64 {
        dot(v, &self.m.apply(u))
    }

    pub fn rayleigh(&self, u: &[C64]) -> f64 {
        (dot(u, &self.k.apply(u)) / dot(u, &self.m.apply(u))).re
    }
}

/// Sparse LU of a pencil.
pub struct Factor {
    lu: faer::sparse::linalg::solvers::Lu<usize, C64>,
    n: usize,
}

impl Factor {
    pub fn new(a: &Csr) -> Result<Self, AssemblyError> {
        let lu = a.to_faer().sp_lu().map_err(|e| AssemblyError::Factorization(format!("{e:?}")))?;
        Ok(Factor { lu, n: a.n })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(x.as_mut());
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    /// Solves for every column of a dense right-hand side.
    pub fn solve_mat(&self, b: &Mat<C64>) -> Mat<C64> {
        let mut x = b.clone();
        self.lu.solve_in_place(x.as_mut());
        x
    }
}

/// `sum conj(v) u`.
pub fn dot(v: &[C64], u: &[C64]) -> C64 {
    v.iter().zip(u).map(|(a, b)| a.conj() * b).sum()
}

/// Conormal functionals of a field on the column line `col`, from the elements on each side.
///
/// Returns `(right, left)` with `right = -(A_R u)` and `left = (A_L u)` on the line rows, where
/// `A_R`, `A_L` are the pencils `a - lambda m` restricted to the adjacent columns. The normal
/// points to increasing `s`; both agree for a solution of the pencil.
pub fn line_conormals(
    mesh: &StripMesh,
    coef: &dyn Fn(&Vec2) -> f64,
    field: &dyn Fn(RawNode) -> C64,
    lambda: C64,
    col: i64,
) -> (Vec<C64>, Vec<C64>) {
    let jm = mesh.j_max();
    let rows = mesh.rows();
    let mut right = vec![C64::new(0.0, 0.0); rows];
    let mut left = vec![C64::new(0.0, 0.0); rows];
    for (anchor, out, sign) in [(col + 1, &mut right, -1.0), (col, &mut left, 1.0)] {
        for j in (-jm - 1)..jm {
            for shape in 0..2 {
                let e = mesh.geom.element((anchor, j), shape, coef);
                let vals = e.verts.map(&field);
                for p in 0..3 {
                    let v = e.verts[p];
                    if v.0 != col || v.1.abs() >= jm {
                        continue;
                    }
                    let r = mesh.row_index(v.1).unwrap();
                    let mut acc = C64::new(0.0, 0.0);
                    for q in 0..3 {
                        acc += (e.k[p][q] - lambda * e.m[p][q]) * vals[q];
                    }
                    out[r] += sign * acc;
                }
            }
        }
    }
    (right, left)
}

/// Bloch extension of a cell vector to raw nodes.
pub fn bloch_field<'a>(mesh: &'a StripMesh, u: &'a [C64], kappa: C64) -> impl Fn(RawNode) -> C64 + 'a {
    move |p| mesh.bloch_value(u, kappa, p)
}
