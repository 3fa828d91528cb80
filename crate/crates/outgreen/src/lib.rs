//! Out-going Green function of the straight-interface operator and its far-field checks.

pub mod contour;
pub mod green;

pub use contour::{band_continuation, build_contour, ContourError, ContourSettings, ContourSpec};
pub use green::{CellField, CellReduction, GreenError, GreenEvaluator, SparseRows};
pub mod checks;
pub use checks::{
    cauchy_mean_value, compare_with_chain, contour_independence, farfield_along_e, reflection_covariance,
    transverse_decay_check, truncated_chain, truncation_cells, FarField, TransverseDecay,
};
