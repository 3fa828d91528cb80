//! Plane-wave coefficients of the periodic fields, computed from the radial transform of the bump.

use crate::geometry::{LatticeGeometry, Vec2};
use crate::medium::{bump_profile, MediumSpec};
use crate::symmetry::{SymmetryOp, SymmetryTag};
use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::num::NonZeroUsize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FourierError {
    #[error("truncation set is not invariant under {0}")]
    NotSymmetric(&'static str),
    #[error("cutoff must be positive and finite")]
    BadCutoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    A,
    B,
}

/// Reciprocal lattice vector by its integer coordinates in `(e1s, e2s)`.
pub type GIndex = (i32, i32);

pub fn g_vector(geom: &LatticeGeometry, m: GIndex) -> Vec2 {
    m.0 as f64 * geom.e1s + m.1 as f64 * geom.e2s
}

/// Integer coordinates of a reciprocal vector, `None` if it is off the lattice.
pub fn g_index(geom: &LatticeGeometry, g: &Vec2) -> Option<GIndex> {
    let c = Vec2::new(geom.e1.dot(g), geom.e2.dot(g)) / (2.0 * PI);
    let r = c.map(f64::round);
    if (c - r).norm() > 1e-8 {
        return None;
    }
    Some((r[0] as i32, r[1] as i32))
}

/// Finite set of reciprocal vectors `G` (plane waves `e^{i(kappa+G).x}`).
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationSet {
    pub kappa: Vec2,
    pub indices: Vec<GIndex>,
}

impl TruncationSet {
    /// `{G : |kappa + G| <= gmax}` sorted by length then index, so shells stay together.
    pub fn around(geom: &LatticeGeometry, kappa: Vec2, gmax: f64) -> Result<Self, FourierError> {
        if !(gmax.is_finite() && gmax > 0.0) {
            return Err(FourierError::BadCutoff);
        }
        // slack absorbs roundoff on shells that sit exactly at the cutoff
        let r2 = gmax * gmax * (1.0 + 1e-10);
        let span = (gmax / geom.e2s.norm().min(geom.e1s.norm()) * 2.0).ceil() as i32 + 2;
        let mut out: Vec<(f64, GIndex)> = Vec::new();
        for m1 in -span..=span {
            for m2 in -span..=span {
                let q = kappa + g_vector(geom, (m1, m2));
                let n2 = q.norm_squared();
                if n2 <= r2 {
                    out.push((n2, (m1, m2)));
                }
            }
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        Ok(TruncationSet { kappa, indices: out.into_iter().map(|x| x.1).collect() })
    }

    pub fn centred(geom: &LatticeGeometry, gmax: f64) -> Result<Self, FourierError> {
        Self::around(geom, Vec2::zeros(), gmax)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Index map of the shifted momenta `kappa + G` under `op`, modulo the lattice.
    ///
    /// Entry `i` maps to `j` with `O(kappa + G_i) = kappa + G_j`; `None` unless `O kappa` is
    /// equivalent to `kappa` and the set is closed.
    pub fn permutation(&self, geom: &LatticeGeometry, op: &SymmetryOp) -> Option<Vec<usize>> {
        let pos: HashMap<GIndex, usize> =
            self.indices.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        self.indices
            .iter()
            .map(|&m| {
                let q = op.apply(&(self.kappa + g_vector(geom, m)));
                let gi = g_index(geom, &(q - self.kappa))?;
                pos.get(&gi).copied()
            })
            .collect()
    }

    /// Rejects sets not closed under the point symmetries that fix `kappa` modulo the lattice.
    ///
    /// At the origin that is the whole group; at `K` it is generated by `R` and `V F`.
    pub fn validate_symmetric(&self, geom: &LatticeGeometry) -> Result<(), FourierError> {
        let vf = SymmetryOp { matrix: -SymmetryOp::reflection().matrix, tag: SymmetryTag::F };
        let ops = [
            ("R", SymmetryOp::rotation()),
            ("F", SymmetryOp::reflection()),
            ("V", SymmetryOp::inversion()),
            ("VF", vf),
        ];
        for (name, op) in ops {
            if !geom.same_class(&op.apply(&self.kappa), &self.kappa, 1e-9) {
                continue;
            }
            if self.permutation(geom, &op).is_none() {
                return Err(FourierError::NotSymmetric(name));
            }
        }
        Ok(())
    }
}

/// Evaluates the coefficient `g^(G) = |Y|^-1 int_Y g e^{-iG.x}` analytically.
#[derive(Debug, Clone)]
pub struct CoefficientModel {
    geom: LatticeGeometry,
    a0: f64,
    amp_a: f64,
    amp_b: f64,
    delta: f64,
    site_a: Vec2,
    site_b: Vec2,
    rod: RadialTransform,
    centre_amp: f64,
    centre: RadialTransform,
}

/// `F(k) = 2 pi int_0^r0 f(r) J0(k r) r dr` for the bump profile.
#[derive(Debug, Clone)]
pub struct RadialTransform {
    nodes: Vec<(f64, f64)>,
}

impl RadialTransform {
    pub fn new(r0: f64, order: usize) -> Self {
        let gl = GaussLegendre::new(NonZeroUsize::new(order).expect("quadrature order"));
        let nodes = gl
            .as_node_weight_pairs()
            .into_iter()
            .map(|(x, w)| {
                let r = 0.5 * r0 * (x + 1.0);
                (r, 0.5 * r0 * w * 2.0 * PI * r * bump_profile(r, r0))
            })
            .collect();
        RadialTransform { nodes }
    }

    pub fn eval(&self, k: f64) -> f64 {
        self.nodes.iter().map(|&(r, w)| w * libm::j0(k * r)).sum()
    }
}

impl CoefficientModel {
    pub fn new(m: &MediumSpec) -> Self {
        let p = &m.params;
        CoefficientModel {
            geom: m.geometry.clone(),
            a0: p.a0,
            amp_a: p.amp_a,
            amp_b: p.amp_b,
            delta: p.delta,
            site_a: m.site_a,
            site_b: m.site_b,
            rod: RadialTransform::new(p.radius, 96),
            centre_amp: p.centre_amp,
            centre: RadialTransform::new(p.centre_radius, 96),
        }
    }

    pub fn coefficient(&self, field: Field, m: GIndex) -> Complex64 {
        let g = g_vector(&self.geom, m);
        let area = self.geom.cell_area();
        let k = g.norm();
        let pa = Complex64::from_polar(1.0, -g.dot(&self.site_a));
        let pb = Complex64::from_polar(1.0, -g.dot(&self.site_b));
        let rod = self.rod.eval(k) / area;
        match field {
            Field::A => {
                let mut v = self.amp_a * rod * (pa + pb);
                if m == (0, 0) {
                    v += self.a0;
                }
                if self.centre_amp != 0.0 {
                    v += self.centre_amp * self.centre.eval(k) / area;
                }
                v
            }
            Field::B => self.amp_b * rod * (pa - pb),
        }
    }

    /// Coefficient of `a + sign * delta * b`.
    pub fn signed(&self, sign: f64, m: GIndex) -> Complex64 {
        let a = self.coefficient(Field::A, m);
        if sign == 0.0 {
            a
        } else {
            a + sign * self.delta * self.coefficient(Field::B, m)
        }
    }
}

/// Coefficients on a symmetric truncation set.
#[derive(Debug, Clone)]
pub struct FourierTable {
    pub field: Field,
    pub set: TruncationSet,
    pub values: Vec<Complex64>,
}

impl FourierTable {
    pub fn get(&self, m: GIndex) -> Option<Complex64> {
        self.set.indices.iter().position(|&x| x == m).map(|i| self.values[i])
    }
}

pub fn fourier_coefficients(m: &MediumSpec, field: Field, gmax: f64) -> Result<FourierTable, FourierError> {
    let set = TruncationSet::centred(&m.geometry, gmax)?;
    fourier_on_set(m, field, set)
}

pub fn fourier_on_set(m: &MediumSpec, field: Field, set: TruncationSet) -> Result<FourierTable, FourierError> {
    set.validate_symmetric(&m.geometry)?;
    let model = CoefficientModel::new(m);
    let values = set.indices.iter().map(|&g| model.coefficient(field, g)).collect();
    Ok(FourierTable { field, set, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_geometry;
    use crate::medium::{build_medium, MediumParams};

    #[test]
    fn constant_medium_has_only_mean() {
        let m = build_medium(&MediumParams::constant(1.0)).unwrap();
        let t = fourier_coefficients(&m, Field::A, 40.0).unwrap();
        assert_eq!(t.get((0, 0)).unwrap(), Complex64::new(1.0, 0.0));
        assert!(t.values.iter().skip(1).all(|v| v.norm() == 0.0));
    }

    #[test]
    fn truncation_sets_are_symmetric() {
        let g = build_geometry();
        let s = TruncationSet::around(&g, g.k, 7.0 * g.e1s.norm()).unwrap();
        assert!(s.validate_symmetric(&g).is_ok());
        let r = s.permutation(&g, &SymmetryOp::rotation()).unwrap();
        let mut sorted = r.clone();
        sorted.sort();
        assert_eq!(sorted, (0..s.len()).collect::<Vec<_>>());
    }

    #[test]
    fn lopsided_set_is_rejected() {
        let g = build_geometry();
        let mut s = TruncationSet::centred(&g, 20.0).unwrap();
        s.indices.retain(|&m| m != (1, 0));
        assert!(matches!(s.validate_symmetric(&g), Err(FourierError::NotSymmetric(_))));
    }

    #[test]
    fn radial_transform_at_zero_is_bump_integral() {
        // int_0^1 exp(1 - 1/(1-q^2)) 2 pi q dq, frozen from adaptive quadrature
        let t = RadialTransform::new(1.0, 96);
        assert!((t.eval(0.0) - 1.268_112_161_1).abs() < 1e-9);
    }
}
