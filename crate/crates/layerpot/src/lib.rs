//! Layer potentials of the straight-interface Green function on the auxiliary line `Gamma`,
//! and the odd and even bent-interface modes built from them.

pub mod bend;
pub mod checks;
pub mod operators;
pub mod scan;

pub use bend::{solve_bent_mode, BendResiduals, BendSettings, BentModeSolution, Parity, StraightModes};
pub use checks::{
    bump_density, calderon_commutator, double_layer_jump, dtn_group_velocity, projection_identity_check,
    reflect_about_gamma, rotated_reach, rotated_relations, single_layer_jump, DoubleLayerJump, DtnReport,
    ProjectionReport, RotatedRelations, SingleLayerJump,
};
pub use operators::{
    assemble_operators, double_layer_field, line_mass, mode_boundary_data, single_layer_field, BoundaryOperatorSet,
    LayerError, ModeBoundaryData, RegularizedInverse, JUMP_TOLERANCE,
};
pub use scan::{corner_mode_scan, CornerCandidate, ScanPoint, ScanReport, ScanSettings};
