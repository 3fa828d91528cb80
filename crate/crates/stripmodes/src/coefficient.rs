use lattice::{MediumSpec, SymmetryOp, Vec2};
use serde::{Deserialize, Serialize};

/// Which scalar coefficient of the medium a discretization is built for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Coefficient {
    Constant(f64),
    /// `a` alone.
    Unperturbed,
    /// `a + sign * delta * b`.
    Bulk(f64),
    /// `a^E`, switching sign of the perturbation across `E`.
    Interface,
    /// `a^E(R x)`, seen by rotated interface modes.
    RotatedInterface,
    /// `a^E` left of the auxiliary line, `a^E(R x)` right of it.
    Bend,
}

impl Coefficient {
    pub fn eval(&self, m: &MediumSpec, x: &Vec2) -> f64 {
        match *self {
            Coefficient::Constant(c) => c,
            Coefficient::Unperturbed => m.a(x),
            Coefficient::Bulk(sign) => m.a_signed(x, sign),
            Coefficient::Interface => m.a_interface(x),
            Coefficient::RotatedInterface => m.a_interface(&SymmetryOp::rotation().apply(x)),
            Coefficient::Bend => m.a_bend(x),
        }
    }

    pub fn closure<'a>(&'a self, m: &'a MediumSpec) -> impl Fn(&Vec2) -> f64 + Sync + 'a {
        move |x| self.eval(m, x)
    }
}
