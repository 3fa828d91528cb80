//! Staged runs of the bent valley-Hall interface computation: configuration, caching,
//! payload files and the acceptance report.

pub mod compute;
pub mod config;
pub mod criteria;
pub mod payload;
pub mod report;
pub mod stage;

pub use config::{ConfigError, ContourConfig, Discretization, OutputConfig, RunConfig, Sweeps, Tolerances};
pub use criteria::{evaluate, Check, CriterionOutcome, Payloads, Status};
pub use report::{emit_report, load_payloads, Report, Summary};
pub use stage::{input_hash, Pipeline, PipelineError, Stage, StageArtifact};
