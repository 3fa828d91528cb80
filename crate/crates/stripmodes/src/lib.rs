//! Strip eigenproblem for the straight interface, in skewed lattice coordinates.

pub mod assembly;
pub mod band;
pub mod cell;
pub mod coefficient;
pub mod eigen;
pub mod flux;
pub mod mesh;

pub use assembly::{line_conormals, AssemblyError, Csr, Factor, StripDiscretization, StripOperator};
pub use cell::{discrete_dirac_point, discrete_gap, CellProblem, DiscreteDiracPoint};
pub use eigen::{eigs_near, Eigenpair, LanczosSettings};
pub use mesh::{MeshGeometry, RawNode, StripMesh};
pub use band::{fix_phase, BandSettings, BandTableError, InterfaceBandTable, InterfaceMode, KappaPair, SampleFlag};
pub use coefficient::Coefficient;
pub use flux::{
    boundary_trace, energy_flux, flux_form, linear_fit, mode_trace, reflection_between, reflection_relation,
    transverse_decay, BoundaryTrace, DecayFit, ReflectionReport, TraceSide,
};
