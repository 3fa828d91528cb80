//! Stage graph, input hashing, the stage cache and payload files.

use crate::compute::{self, BoxError, Context};
use crate::config::RunConfig;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Bands,
    Dirac,
    Gap,
    Interface,
    Green,
    Bend,
    Scan,
}

impl Stage {
    pub const ALL: [Stage; 7] = [Stage::Bands, Stage::Dirac, Stage::Gap, Stage::Interface, Stage::Green, Stage::Bend, Stage::Scan];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Bands => "bands",
            Stage::Dirac => "dirac",
            Stage::Gap => "gap",
            Stage::Interface => "interface",
            Stage::Green => "green",
            Stage::Bend => "bend",
            Stage::Scan => "scan",
        }
    }

    pub fn upstream(self) -> &'static [Stage] {
        match self {
            Stage::Bands | Stage::Dirac | Stage::Interface => &[],
            Stage::Gap => &[Stage::Dirac],
            Stage::Green | Stage::Bend | Stage::Scan => &[Stage::Interface],
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("stage {stage} needs {upstream}, which has not run")]
    MissingUpstream { stage: &'static str, upstream: &'static str },
    #[error("stage {stage}: {source}")]
    Stage { stage: &'static str, source: BoxError },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("no stage artifacts to report on")]
    NoArtifacts,
}

/// Record of one stage run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageArtifact {
    pub stage: Stage,
    /// SHA-256 of the stage inputs: its slice of the configuration, the code version and the
    /// hashes of its upstream stages.
    pub input_hash: String,
    /// Payload files; the JSON report comes first.
    pub payload: Vec<PathBuf>,
    pub started_unix: f64,
    pub finished_unix: f64,
    /// Whether the run was satisfied from the stage cache.
    #[serde(default)]
    pub cached: bool,
}

impl StageArtifact {
    pub fn json_path(&self) -> Option<&Path> {
        self.payload.iter().map(|p| p.as_path()).find(|p| p.extension().is_some_and(|e| e == "json"))
    }
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Configuration slice each stage reads.
fn stage_inputs(cfg: &RunConfig, stage: Stage) -> serde_json::Value {
    let d = &cfg.discretization;
    let s = &cfg.sweeps;
    let t = &cfg.tolerances;
    // the unperturbed stages do not see delta
    let bare = cfg.medium.with_delta(0.0);
    let strip = json!({
        "medium": cfg.medium, "resolution": d.resolution, "t_cells": d.t_cells,
        "gap_mesh": d.gap_mesh, "kappa_samples": d.kappa_samples,
    });
    match stage {
        Stage::Bands => json!({ "medium": bare, "shells": d.shells, "per_leg": s.path_per_leg, "bands": s.path_bands }),
        Stage::Dirac => json!({ "medium": bare, "shells": d.shells, "degeneracy": t.degeneracy }),
        Stage::Gap => json!({ "medium": cfg.medium, "shells": d.shells, "bz_mesh": d.bz_mesh }),
        Stage::Interface => strip,
        Stage::Green => json!({
            "contour": cfg.contour, "reach": d.farfield_reach, "source": s.source,
            "probe": s.farfield_probe, "fit": s.farfield_fit, "field_cells": s.field_cells,
        }),
        Stage::Bend => json!({
            "contour": cfg.contour, "reach": d.reach, "half_width": d.half_width(), "lambdas": s.bend_lambdas,
            "margin": s.bend_margin, "tikhonov": t.tikhonov, "threshold": t.sigma_threshold,
            "coarse": d.coarse_resolution, "field_cells": s.field_cells,
        }),
        Stage::Scan => json!({
            "contour": cfg.contour, "half_width": d.half_width(), "points": s.scan_points, "threshold": t.sigma_threshold,
        }),
    }
}

/// Input hash of a stage, chained through its upstream stages.
pub fn input_hash(cfg: &RunConfig, stage: Stage) -> String {
    let upstream: Vec<String> = stage.upstream().iter().map(|&u| input_hash(cfg, u)).collect();
    let doc = json!({
        "stage": stage.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "inputs": stage_inputs(cfg, stage),
        "upstream": upstream,
    });
    hex::encode(Sha256::digest(serde_json::to_vec(&doc).expect("hash input serialises")))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), PipelineError> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, v)?;
    f.write_all(b"\n")?;
    Ok(())
}

fn write_csv<const K: usize>(path: &Path, header: [&str; K], rows: &[[f64; K]]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r.as_slice())?;
    }
    w.flush()?;
    Ok(())
}

/// Runs stages in dependency order, reusing cached artifacts whose input hash is unchanged.
pub struct Pipeline {
    ctx: Context,
    artifacts: BTreeMap<Stage, StageArtifact>,
}

impl Pipeline {
    pub fn new(cfg: RunConfig) -> Result<Self, PipelineError> {
        cfg.validate()?;
        fs::create_dir_all(&cfg.output.dir)?;
        if let Some(c) = &cfg.output.stage_cache {
            fs::create_dir_all(c)?;
        }
        Ok(Pipeline { ctx: Context::new(cfg), artifacts: BTreeMap::new() })
    }

    pub fn config(&self) -> &RunConfig {
        &self.ctx.cfg
    }

    pub fn artifacts(&self) -> Vec<StageArtifact> {
        self.artifacts.values().cloned().collect()
    }

    /// Runs `stage`, first running any upstream stage that has no artifact yet.
    pub fn run_stage(&mut self, stage: Stage) -> Result<StageArtifact, PipelineError> {
        for &u in stage.upstream() {
            if !self.artifacts.contains_key(&u) {
                self.run_stage(u)?;
            }
        }
        self.run_stage_only(stage)
    }

    /// Runs `stage` alone; its upstream stages must already have artifacts.
    pub fn run_stage_only(&mut self, stage: Stage) -> Result<StageArtifact, PipelineError> {
        if let Some(&u) = stage.upstream().iter().find(|u| !self.artifacts.contains_key(u)) {
            return Err(PipelineError::MissingUpstream { stage: stage.name(), upstream: u.name() });
        }
        let hash = input_hash(&self.ctx.cfg, stage);
        if let Some(a) = self.cached(stage, &hash) {
            self.artifacts.insert(stage, a.clone());
            return Ok(a);
        }
        let started = now();
        let payload = self.execute(stage).map_err(|e| match e {
            PipelineError::Stage { .. } => e,
            other => PipelineError::Stage { stage: stage.name(), source: Box::new(other) },
        })?;
        let artifact = StageArtifact { stage, input_hash: hash, payload, started_unix: started, finished_unix: now(), cached: false };
        if let Some(dir) = &self.ctx.cfg.output.stage_cache {
            write_json(&dir.join(format!("{}.json", stage.name())), &artifact)?;
        }
        self.artifacts.insert(stage, artifact.clone());
        Ok(artifact)
    }

    fn cached(&self, stage: Stage, hash: &str) -> Option<StageArtifact> {
        let dir = self.ctx.cfg.output.stage_cache.as_ref()?;
        let text = fs::read_to_string(dir.join(format!("{}.json", stage.name()))).ok()?;
        let a: StageArtifact = serde_json::from_str(&text).ok()?;
        (a.input_hash == hash && a.payload.iter().all(|p| p.exists())).then_some(StageArtifact { cached: true, ..a })
    }

    fn execute(&mut self, stage: Stage) -> Result<Vec<PathBuf>, PipelineError> {
        let ctx = &self.ctx;
        let out = ctx.cfg.output.dir.clone();
        let fail = |source: BoxError| PipelineError::Stage { stage: stage.name(), source };
        let mut files = Vec::new();
        match stage {
            Stage::Bands => {
                let rows = compute::bands(ctx).map_err(fail)?;
                let p = out.join("bands.csv");
                let mut w = csv::Writer::from_path(&p)?;
                let mut header = vec!["arc".to_string(), "kx".into(), "ky".into()];
                header.extend((1..=ctx.cfg.sweeps.path_bands).map(|k| format!("lambda{k}")));
                w.write_record(&header)?;
                for r in &rows {
                    w.serialize(r)?;
                }
                w.flush()?;
                files.push(p);
            }
            Stage::Dirac => {
                let p = out.join("dirac.json");
                write_json(&p, &compute::dirac(ctx).map_err(fail)?)?;
                files.push(p);
            }
            Stage::Gap => {
                let p = out.join("gap.json");
                write_json(&p, &compute::gap(ctx).map_err(fail)?)?;
                files.push(p);
            }
            Stage::Interface => {
                let p = out.join("interface.json");
                write_json(&p, &compute::interface(ctx).map_err(fail)?)?;
                files.push(p);
                let p = out.join("interface.csv");
                write_csv(&p, ["kappa", "lambda", "slope"], &compute::interface_band_rows(ctx).map_err(fail)?)?;
                files.push(p);
                let p = out.join("interface_mode.csv");
                write_csv(&p, ["i", "j", "s", "t", "re", "im"], &compute::interface_mode_grid(ctx).map_err(fail)?)?;
                files.push(p);
            }
            Stage::Green => {
                let r = compute::green(ctx).map_err(fail)?;
                let p = out.join("green.json");
                write_json(&p, &r.payload)?;
                files.push(p);
                let p = out.join("green_field.csv");
                write_csv(&p, ["i", "j", "s", "t", "re", "im"], &r.field)?;
                files.push(p);
            }
            Stage::Bend => {
                let r = compute::bend(ctx).map_err(fail)?;
                let p = out.join("bend.json");
                write_json(&p, &r.payload)?;
                files.push(p);
                let p = out.join("bend_field.csv");
                write_csv(&p, ["i", "j", "s", "t", "odd_re", "odd_im", "even_re", "even_im"], &r.field)?;
                files.push(p);
            }
            Stage::Scan => {
                let r = compute::scan(ctx).map_err(fail)?;
                let p = out.join("scan.json");
                write_json(&p, &r)?;
                files.push(p);
                let rows: Vec<[f64; 3]> = r.report.points.iter().map(|q| [q.lambda, q.sigma_s, q.sigma_n]).collect();
                let p = out.join("scan.csv");
                write_csv(&p, ["lambda", "sigma_s", "sigma_n"], &rows)?;
                files.push(p);
            }
        }
        // the JSON report leads the payload list
        files.sort_by_key(|p| p.extension().is_none_or(|e| e != "json"));
        Ok(files)
    }
}
