use crate::geometry::{sqrt3, Vec2};
use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryTag {
    R,
    F,
    V,
    FGamma,
}

/// Orthogonal map of the plane; the induced action on functions is `(O u)(x) = u(O x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryOp {
    pub matrix: Matrix2<f64>,
    pub tag: SymmetryTag,
}

impl SymmetryOp {
    pub fn new(tag: SymmetryTag) -> Self {
        let h = 0.5 * sqrt3();
        let r = Matrix2::new(-0.5, -h, h, -0.5);
        let f = Matrix2::new(-1.0, 0.0, 0.0, 1.0);
        let matrix = match tag {
            SymmetryTag::R => r,
            SymmetryTag::F => f,
            SymmetryTag::V => -Matrix2::identity(),
            SymmetryTag::FGamma => f * r,
        };
        SymmetryOp { matrix, tag }
    }

    pub fn rotation() -> Self {
        Self::new(SymmetryTag::R)
    }

    pub fn reflection() -> Self {
        Self::new(SymmetryTag::F)
    }

    pub fn inversion() -> Self {
        Self::new(SymmetryTag::V)
    }

    pub fn gamma_reflection() -> Self {
        Self::new(SymmetryTag::FGamma)
    }

    pub fn apply(&self, x: &Vec2) -> Vec2 {
        self.matrix * x
    }

    pub fn inverse(&self) -> Matrix2<f64> {
        self.matrix.transpose()
    }

    /// Action on strip coordinates, `(s, t) -> M^-1 O M (s, t)`.
    pub fn strip_matrix(&self, strip_map: &Matrix2<f64>) -> Matrix2<f64> {
        strip_map.try_inverse().unwrap() * self.matrix * strip_map
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_geometry;

    fn close(a: &Matrix2<f64>, b: &Matrix2<f64>) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn group_relations() {
        let r = SymmetryOp::rotation().matrix;
        let f = SymmetryOp::reflection().matrix;
        let v = SymmetryOp::inversion().matrix;
        let fg = SymmetryOp::gamma_reflection().matrix;
        let id = Matrix2::identity();
        assert!(close(&(r * r * r), &id));
        assert!(close(&(f * f), &id));
        assert!(close(&(v * v), &id));
        assert!(close(&(fg * fg), &id));
        assert!(close(&fg, &(f * r)));
    }

    #[test]
    fn gamma_reflection_flips_normal() {
        let g = build_geometry();
        let fg = SymmetryOp::gamma_reflection();
        assert!((fg.apply(&g.nu) + g.nu).norm() < 1e-14);
        assert!((fg.apply(&g.g) - g.g).norm() < 1e-14);
    }

    #[test]
    fn rotation_fixes_k_class() {
        let g = build_geometry();
        let rk = SymmetryOp::rotation().apply(&g.k);
        assert!((rk - Vec2::new(-4.0 * std::f64::consts::PI / 3.0, 0.0)).norm() < 1e-13);
        assert!(g.same_class(&rk, &g.k, 1e-12));
        assert!((rk - g.k + g.e1s).norm() < 1e-12);
    }

    #[test]
    fn rotation_matches_reflection_on_gamma() {
        let g = build_geometry();
        let r = SymmetryOp::rotation();
        let f = SymmetryOp::reflection();
        for t in [-2.5, 0.3, 1.0] {
            let x = g.from_strip(0.0, t);
            assert!((r.apply(&x) - f.apply(&x)).norm() < 1e-14);
        }
        // F in strip coordinates is (s, t) -> (-s - 3t, t)
        let fs = f.strip_matrix(&g.strip_map());
        assert!(close(&fs, &Matrix2::new(-1.0, -3.0, 0.0, 1.0)));
    }
}
