//! Run configuration, read from TOML with every field defaulted.

use lattice::MediumParams;
use outgreen::ContourSettings;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("toml: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Discretization {
    /// Plane-wave cutoff in units of `|e1s|`.
    pub shells: f64,
    /// Brillouin-zone mesh of the plane-wave gap search.
    pub bz_mesh: usize,
    /// Finite-element nodes per unit cell edge, for the strip and the cell problems.
    pub resolution: usize,
    /// Coarser resolution for the refinement check.
    pub coarse_resolution: usize,
    /// Half-width `T` of the strip in cells.
    pub t_cells: usize,
    /// Half-width `L` of the `Gamma` window; the full line `L = T` when absent.
    pub half_width: Option<f64>,
    /// Brillouin-zone mesh of the finite-element gap.
    pub gap_mesh: usize,
    /// `kappa` intervals over one period for the interface band.
    pub kappa_samples: usize,
    /// Cells of Green blocks for the layer operators and the bent modes.
    pub reach: i64,
    /// Cells of Green blocks for the far-field check.
    pub farfield_reach: i64,
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization {
            shells: bulkbands::DEFAULT_SHELLS,
            bz_mesh: 12,
            resolution: 8,
            coarse_resolution: 6,
            t_cells: 8,
            half_width: None,
            gap_mesh: 18,
            kappa_samples: 400,
            reach: 16,
            farfield_reach: 40,
        }
    }
}

impl Discretization {
    pub fn half_width(&self) -> f64 {
        self.half_width.unwrap_or(self.t_cells as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourConfig {
    pub eta: f64,
    pub segment_nodes: usize,
    pub semicircle_nodes: usize,
    pub real_axis_from: f64,
    /// Node counts of the cheaper rule used by the scan.
    pub scan_segment_nodes: usize,
    pub scan_semicircle_nodes: usize,
    /// Second radius for the contour-independence check.
    pub alternate_eta: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        let d = ContourSettings::default();
        let c = ContourSettings::coarse();
        ContourConfig {
            eta: d.eta,
            segment_nodes: d.segment_nodes,
            semicircle_nodes: d.semicircle_nodes,
            real_axis_from: d.real_axis_from,
            scan_segment_nodes: c.segment_nodes,
            scan_semicircle_nodes: c.semicircle_nodes,
            alternate_eta: 0.1,
        }
    }
}

impl ContourConfig {
    pub fn settings(&self) -> ContourSettings {
        ContourSettings {
            eta: self.eta,
            segment_nodes: self.segment_nodes,
            semicircle_nodes: self.semicircle_nodes,
            real_axis_from: self.real_axis_from,
        }
    }

    pub fn scan_settings(&self) -> ContourSettings {
        ContourSettings { segment_nodes: self.scan_segment_nodes, semicircle_nodes: self.scan_semicircle_nodes, ..self.settings() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweeps {
    /// Samples per leg of the `M - K - Gamma - M` path.
    pub path_per_leg: usize,
    pub path_bands: usize,
    /// Frequencies of the bent-mode sweep, spread over the inner part of `I0`.
    pub bend_lambdas: usize,
    /// Fraction of `I0` left out at each end of the bent-mode sweep.
    pub bend_margin: f64,
    pub scan_points: usize,
    /// Raw node of the point source of the far-field check.
    pub source: (i64, i64),
    /// Cell at which the far-field amplitude is compared.
    pub farfield_probe: i64,
    /// Last cell of the remainder fit.
    pub farfield_fit: i64,
    /// Cells on each side of `Gamma` in the exported field maps.
    pub field_cells: i64,
}

impl Default for Sweeps {
    fn default() -> Self {
        Sweeps {
            path_per_leg: 24,
            path_bands: 6,
            bend_lambdas: 12,
            bend_margin: 0.1,
            scan_points: 200,
            source: (3, 2),
            farfield_probe: 30,
            farfield_fit: 20,
            field_cells: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub degeneracy: f64,
    pub cone_slope: f64,
    pub perturbation: f64,
    pub gap_width: f64,
    pub interface_decay_r2: f64,
    pub flux: f64,
    pub beta_modulus: f64,
    pub trace_relation: f64,
    pub green_residual: f64,
    pub contour_independence: f64,
    pub farfield_amplitude: f64,
    pub farfield_r2: f64,
    pub covariance: f64,
    pub layer: f64,
    pub dtn: f64,
    pub flux_balance: f64,
    pub continuity: f64,
    pub bend_decay_r2: f64,
    pub bend_min_lambdas: usize,
    pub sigma_threshold: f64,
    pub tikhonov: f64,
    pub max_dips: usize,
    /// Absolute slack of the convergence check, below which residuals are roundoff.
    pub convergence_noise: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            degeneracy: 1e-8,
            cone_slope: 0.01,
            perturbation: 1e-8,
            gap_width: 0.1,
            interface_decay_r2: 0.99,
            flux: 0.02,
            beta_modulus: 1e-6,
            trace_relation: 0.01,
            green_residual: 1e-6,
            contour_independence: 1e-6,
            farfield_amplitude: 0.05,
            farfield_r2: 0.98,
            covariance: 1e-6,
            layer: 0.05,
            dtn: 0.05,
            flux_balance: 0.05,
            continuity: 0.05,
            bend_decay_r2: 0.95,
            bend_min_lambdas: 10,
            sigma_threshold: 1e-6,
            tikhonov: 1e-10,
            max_dips: 5,
            convergence_noise: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Stage metadata directory; caching is off when absent.
    pub stage_cache: Option<PathBuf>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), stage_cache: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub medium: MediumParams,
    pub discretization: Discretization,
    pub contour: ContourConfig,
    pub sweeps: Sweeps,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    /// Acceptance criteria checked by `report`.
    pub criteria: Vec<u8>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            medium: MediumParams::default(),
            discretization: Discretization::default(),
            contour: ContourConfig::default(),
            sweeps: Sweeps::default(),
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
            workers: 0,
            criteria: (1..=12).collect(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let t = &self.tolerances;
        let positive = [
            ("degeneracy", t.degeneracy),
            ("cone_slope", t.cone_slope),
            ("perturbation", t.perturbation),
            ("gap_width", t.gap_width),
            ("interface_decay_r2", t.interface_decay_r2),
            ("flux", t.flux),
            ("beta_modulus", t.beta_modulus),
            ("trace_relation", t.trace_relation),
            ("green_residual", t.green_residual),
            ("contour_independence", t.contour_independence),
            ("farfield_amplitude", t.farfield_amplitude),
            ("farfield_r2", t.farfield_r2),
            ("covariance", t.covariance),
            ("layer", t.layer),
            ("dtn", t.dtn),
            ("flux_balance", t.flux_balance),
            ("continuity", t.continuity),
            ("bend_decay_r2", t.bend_decay_r2),
            ("sigma_threshold", t.sigma_threshold),
            ("tikhonov", t.tikhonov),
            ("convergence_noise", t.convergence_noise),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("tolerance {name} = {v} must be positive"));
            }
        }
        if t.bend_min_lambdas == 0 || t.max_dips == 0 {
            return bad("bend_min_lambdas and max_dips must be positive".into());
        }
        let d = &self.discretization;
        if d.resolution < 2 || d.coarse_resolution < 2 || d.t_cells < 2 {
            return bad("resolution and t_cells must be at least 2".into());
        }
        if !(d.shells > 0.0) || d.bz_mesh == 0 || d.gap_mesh == 0 || d.kappa_samples < 8 {
            return bad("plane-wave cutoff and every mesh must be nonempty".into());
        }
        let hw = d.half_width();
        if !(hw > 0.0 && hw <= d.t_cells as f64) {
            return bad(format!("half_width {hw} must lie in (0, t_cells]"));
        }
        if d.reach < 3 || d.farfield_reach < 3 {
            return bad("reach must be at least 3 cells".into());
        }
        let s = &self.sweeps;
        if s.path_per_leg == 0 || s.path_bands == 0 || s.bend_lambdas == 0 || s.scan_points == 0 {
            return bad("every sweep grid must be nonempty".into());
        }
        if !(0.0..0.5).contains(&s.bend_margin) {
            return bad("bend_margin must lie in [0, 0.5)".into());
        }
        if s.farfield_probe < 1 || s.farfield_probe > d.farfield_reach - 2 || s.farfield_fit < 2 {
            return bad("far-field probe must lie in 1..=farfield_reach-2".into());
        }
        let c = &self.contour;
        if !(c.eta > 0.0 && c.alternate_eta > 0.0) || c.segment_nodes == 0 || c.semicircle_nodes == 0 {
            return bad("contour radius and node counts must be positive".into());
        }
        if self.criteria.iter().any(|&k| !(1..=12).contains(&k)) {
            return bad("criteria are numbered 1 to 12".into());
        }
        Ok(())
    }
}
