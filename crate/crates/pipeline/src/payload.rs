//! JSON payloads of the stages; each carries the numbers its acceptance criteria read.

use crate::config::RunConfig;
use bulkbands::{DiracPointData, GapReport, PerturbationReport};
use layerpot::{BendResiduals, DtnReport, ProjectionReport, RotatedRelations, ScanReport};
use num_complex::Complex64 as C64;
use outgreen::{FarField, TransverseDecay};
use serde::{Deserialize, Serialize};
use stripmodes::{DecayFit, KappaPair, ReflectionReport};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiracPayload {
    pub config: RunConfig,
    pub dirac: DiracPointData,
    pub perturbation: PerturbationReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapPayload {
    pub config: RunConfig,
    pub gap: GapReport,
}

/// Table samples near one valley projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValleyCount {
    pub kappa: f64,
    pub samples: usize,
    pub single_mode: usize,
    pub multiple_modes: usize,
}

/// Interface eigenvalue at the valley projections against the discrete Dirac energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub lambda_star: f64,
    /// Dirac energy on the twice finer cell mesh, for the mesh part of the tolerance.
    pub lambda_star_fine: f64,
    pub at_valleys: [Option<f64>; 2],
    pub tolerance: f64,
}

impl Crossing {
    pub fn offset(&self) -> f64 {
        self.at_valleys.iter().map(|v| v.map_or(f64::INFINITY, |v| (v - self.lambda_star).abs())).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxSample {
    pub column: i64,
    pub plus: C64,
    pub minus: C64,
    pub cross: C64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterfacePayload {
    pub config: RunConfig,
    pub gap: (f64, f64),
    pub i0: (f64, f64),
    pub d_star: f64,
    pub lambda: f64,
    pub kappa: KappaPair,
    pub valleys: Vec<ValleyCount>,
    pub decay: DecayFit,
    pub crossing: Crossing,
    pub flux: Vec<FluxSample>,
    pub reflection: ReflectionReport,
}

impl InterfacePayload {
    /// Largest flux-identity error relative to the group velocity.
    pub fn flux_error(&self) -> f64 {
        let (sp, sm) = (self.kappa.slope_plus, self.kappa.slope_minus);
        let s = sp.abs().max(sm.abs());
        self.flux
            .iter()
            .map(|f| {
                let a = (f.plus - C64::new(0.0, sp)).norm();
                let b = (f.minus - C64::new(0.0, sm)).norm();
                a.max(b).max(f.cross.norm()) / s
            })
            .fold(0.0, f64::max)
    }

    /// Spread of the self-fluxes over the sampled columns, relative to the group velocity.
    pub fn column_spread(&self) -> f64 {
        let s = self.kappa.slope_plus.abs();
        let mut worst: f64 = 0.0;
        for a in &self.flux {
            for b in &self.flux {
                worst = worst.max((a.plus - b.plus).norm().max((a.minus - b.minus).norm()) / s);
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSummary {
    pub eta: f64,
    pub nodes: usize,
    pub clearance: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenPayload {
    pub config: RunConfig,
    pub lambda: f64,
    pub contour: ContourSummary,
    pub residual: f64,
    pub independence: f64,
    pub covariance: f64,
    pub farfield: FarField,
    pub transverse: TransverseDecay,
}

/// Layer-operator residuals at one frequency and window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerResiduals {
    pub half_width: f64,
    pub single_jump: f64,
    pub double_jump: f64,
    pub calderon: f64,
    pub rotated: RotatedRelations,
    pub projection: ProjectionReport,
    pub dtn: Option<DtnReport>,
}

impl LayerResiduals {
    pub fn worst(&self) -> f64 {
        [self.single_jump, self.double_jump, self.calderon, self.rotated.single_layer, self.rotated.kstar, self.projection.worst()]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn dtn_error(&self) -> Option<f64> {
        self.dtn.map(|d| d.relative_error)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BendSummary {
    pub r_l: C64,
    pub l_l: C64,
    pub r_r: C64,
    pub l_r: C64,
    pub beta: C64,
    pub l_coefficient: C64,
    pub sigma_ratio: f64,
    pub residuals: BendResiduals,
}

impl BendSummary {
    pub fn nonzero(&self) -> bool {
        [self.r_l, self.l_l, self.r_r, self.l_r].iter().all(|z| z.norm() > 0.0 && z.norm().is_finite())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BendPoint {
    pub lambda: f64,
    /// `ok`, `near_dip` when an operator is nearly singular, or the error text.
    pub status: String,
    pub odd: Option<BendSummary>,
    pub even: Option<BendSummary>,
}

/// Residuals of one discretization level for the convergence check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelResiduals {
    pub resolution: usize,
    pub half_width: f64,
    pub lambda: f64,
    pub flux: f64,
    pub layer: f64,
    /// Absent when `S` is nearly singular or a bent solve fails.
    pub dtn: Option<f64>,
    pub bend: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Convergence {
    pub coarse: LevelResiduals,
    pub fine: LevelResiduals,
    pub truncated: LevelResiduals,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BendPayload {
    pub config: RunConfig,
    pub lambda: f64,
    pub layer: LayerResiduals,
    pub sweep: Vec<BendPoint>,
    pub convergence: Convergence,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanPayload {
    pub config: RunConfig,
    pub i0: (f64, f64),
    pub threshold: f64,
    pub report: ScanReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerSummary {
    pub lambda: f64,
    pub operator: String,
    pub sigma_ratio: f64,
}
