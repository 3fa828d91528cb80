//! Bulk Floquet-Bloch spectra of `-div(a grad u)` and `-div((a +- delta b) grad u)`.

pub mod dirac;
pub mod gap;
pub mod path;
pub mod planewave;

pub use dirac::{detect_dirac, perturbation_identities, rotation_eigenvalue, tau, DiracPointData, DiracSettings, PerturbationReport};
pub use gap::{gap_and_inversion, GapReport};
pub use planewave::{BandError, BlochBandResult, DeltaSign, PlaneWaveSolver};

/// Default plane-wave cutoff in units of `|e1s|`.
pub const DEFAULT_SHELLS: f64 = 7.0;
