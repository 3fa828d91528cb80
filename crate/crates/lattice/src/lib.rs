//! Triangular-lattice geometry, point symmetries and the valley-Hall coefficient fields.

pub mod fourier;
pub mod geometry;
pub mod medium;
pub mod symmetry;

pub use fourier::{fourier_coefficients, CoefficientModel, Field, FourierError, FourierTable, GIndex, TruncationSet};
pub use geometry::{build_geometry, sqrt3, LatticeGeometry, Vec2};
pub use medium::{build_medium, bump_profile, read_grid_csv, GridSample, MediumError, MediumParams, MediumSpec};
pub use symmetry::{SymmetryOp, SymmetryTag};
