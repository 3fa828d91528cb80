//! Background lattice, reciprocal lattice and the strip coordinates built on them.

use nalgebra::{Matrix2, Vector2};
use std::f64::consts::PI;

pub type Vec2 = Vector2<f64>;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Geometry of the triangular lattice with the valley-Hall interface conventions.
///
/// The strip coordinates are `x = s*e1 + t*g` with `g = 2*e1 + e2`; the auxiliary
/// interface is the line `s = 0` and the straight interface is `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGeometry {
    pub e1: Vec2,
    pub e2: Vec2,
    pub e1s: Vec2,
    pub e2s: Vec2,
    pub k: Vec2,
    pub kp: Vec2,
    pub g: Vec2,
    pub nu: Vec2,
}

pub fn build_geometry() -> LatticeGeometry {
    let e1 = Vec2::new(1.0, 0.0);
    let e2 = Vec2::new(-0.5, 0.5 * SQRT3);
    let e1s = Vec2::new(2.0 * PI, 2.0 * PI / SQRT3);
    let e2s = Vec2::new(0.0, 4.0 * PI / SQRT3);
    let k = Vec2::new(2.0 * PI / 3.0, 2.0 * PI / SQRT3);
    let g = 2.0 * e1 + e2;
    // unit normal of the auxiliary interface, pointing into s > 0
    let nu = Vec2::new(0.5, -0.5 * SQRT3);
    LatticeGeometry { e1, e2, e1s, e2s, k, kp: -k, g, nu }
}

impl LatticeGeometry {
    /// Columns `e1`, `e2`.
    pub fn basis(&self) -> Matrix2<f64> {
        Matrix2::from_columns(&[self.e1, self.e2])
    }

    pub fn reciprocal_basis(&self) -> Matrix2<f64> {
        Matrix2::from_columns(&[self.e1s, self.e2s])
    }

    /// Columns `e1`, `g`: maps strip coordinates `(s, t)` to the plane.
    pub fn strip_map(&self) -> Matrix2<f64> {
        Matrix2::from_columns(&[self.e1, self.g])
    }

    /// Anisotropy tensor `C = M^-1 M^-T` of the strip map.
    pub fn strip_metric(&self) -> Matrix2<f64> {
        let mi = self.strip_map().try_inverse().expect("strip map is invertible");
        mi * mi.transpose()
    }

    /// Area of the unit cell, equal to `|det M|` for the strip map as well.
    pub fn cell_area(&self) -> f64 {
        self.basis().determinant().abs()
    }

    pub fn to_strip(&self, x: &Vec2) -> (f64, f64) {
        let st = self.strip_map().try_inverse().unwrap() * x;
        (st[0], st[1])
    }

    pub fn from_strip(&self, s: f64, t: f64) -> Vec2 {
        s * self.e1 + t * self.g
    }

    /// Lattice coordinates of `x`, i.e. `c` with `x = c1*e1 + c2*e2`.
    pub fn lattice_coords(&self, x: &Vec2) -> Vec2 {
        let e2s = self.e2s / (2.0 * PI);
        let e1s = self.e1s / (2.0 * PI);
        Vec2::new(e1s.dot(x), e2s.dot(x))
    }

    /// Representative of `x` in the cell `{c1*e1 + c2*e2 : c in [0,1)^2}`.
    pub fn fold_to_cell(&self, x: &Vec2) -> Vec2 {
        let c = self.lattice_coords(x);
        let f = Vec2::new(wrap_unit(c[0]), wrap_unit(c[1]));
        f[0] * self.e1 + f[1] * self.e2
    }

    /// Representative of a quasi-momentum in `{c1*e1s + c2*e2s : c in [0,1)^2}`.
    pub fn fold_to_bz(&self, kappa: &Vec2) -> Vec2 {
        let c = Vec2::new(self.e1.dot(kappa), self.e2.dot(kappa)) / (2.0 * PI);
        let f = Vec2::new(wrap_unit(c[0]), wrap_unit(c[1]));
        f[0] * self.e1s + f[1] * self.e2s
    }

    /// Whether two quasi-momenta differ by a reciprocal lattice vector.
    pub fn same_class(&self, a: &Vec2, b: &Vec2, tol: f64) -> bool {
        let d = a - b;
        let c = Vec2::new(self.e1.dot(&d), self.e2.dot(&d)) / (2.0 * PI);
        (c[0] - c[0].round()).abs() < tol && (c[1] - c[1].round()).abs() < tol
    }

    /// Bloch phases `(k.e1, k.g)` seen by the strip discretisation.
    pub fn strip_phases(&self, kappa: &Vec2) -> (f64, f64) {
        (kappa.dot(&self.e1), kappa.dot(&self.g))
    }

    /// Honeycomb sites inside the cell.
    pub fn site_a(&self) -> Vec2 {
        Vec2::new(0.5, SQRT3 / 6.0)
    }

    pub fn site_b(&self) -> Vec2 {
        Vec2::new(1.0, SQRT3 / 3.0)
    }

    /// Whether `x` lies in the left half-plane `s < 0` cut by the auxiliary interface.
    pub fn in_left(&self, x: &Vec2) -> bool {
        self.to_strip(x).0 < 0.0
    }
}

fn wrap_unit(c: f64) -> f64 {
    let f = c - c.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

pub fn sqrt3() -> f64 {
    SQRT3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duality() {
        let g = build_geometry();
        assert!((g.e1s.dot(&g.e1) - 2.0 * PI).abs() < 1e-12);
        assert!(g.e1s.dot(&g.e2).abs() < 1e-12);
        assert!(g.e2s.dot(&g.e1).abs() < 1e-12);
        assert!((g.e2s.dot(&g.e2) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn normal_is_unit_and_orthogonal_to_g() {
        let g = build_geometry();
        assert!((g.nu.norm() - 1.0).abs() < 1e-15);
        assert!(g.nu.dot(&g.g).abs() < 1e-14);
        assert!(g.nu.dot(&g.e1) > 0.0);
    }

    #[test]
    fn strip_roundtrip() {
        let g = build_geometry();
        let x = Vec2::new(0.3, -1.7);
        let (s, t) = g.to_strip(&x);
        assert!((g.from_strip(s, t) - x).norm() < 1e-14);
        assert!((g.cell_area() - SQRT3 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn k_point_phases() {
        let g = build_geometry();
        let (ps, pt) = g.strip_phases(&g.k);
        assert!((ps - 2.0 * PI / 3.0).abs() < 1e-13);
        assert!((pt - 2.0 * PI).abs() < 1e-13);
    }
}
