//! Summary document over the stage artifacts.

use crate::config::RunConfig;
use crate::criteria::{evaluate, CriterionOutcome, Payloads, Status};
use crate::payload::CornerSummary;
use crate::stage::{PipelineError, Stage, StageArtifact};
use num_complex::Complex64 as C64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BentCoefficients {
    pub lambda: f64,
    /// `(lL / rL, rR / rL, lR / rL)` of the odd and even modes.
    pub odd: Option<(C64, C64, C64)>,
    pub even: Option<(C64, C64, C64)>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub lambda_star: Option<f64>,
    pub bulk_gap: Option<(f64, f64)>,
    pub strip_gap: Option<(f64, f64)>,
    pub i0: Option<(f64, f64)>,
    pub beta: Option<C64>,
    pub flux_error: Option<f64>,
    pub bent: Vec<BentCoefficients>,
    pub candidates: Vec<CornerSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: RunConfig,
    pub artifacts: Vec<StageArtifact>,
    pub summary: Summary,
    pub criteria: Vec<CriterionOutcome>,
    /// Every enabled criterion ran and passed.
    pub all_passed: bool,
}

impl Report {
    /// One line per criterion and a short summary.
    pub fn text(&self) -> String {
        let mut s = String::new();
        let s_ = &self.summary;
        if let Some(l) = s_.lambda_star {
            let _ = writeln!(s, "lambda*      {l:.6}");
        }
        if let Some(g) = s_.bulk_gap {
            let _ = writeln!(s, "bulk gap     [{:.6}, {:.6}]", g.0, g.1);
        }
        if let Some(g) = s_.i0 {
            let _ = writeln!(s, "I0           [{:.6}, {:.6}]", g.0, g.1);
        }
        if let Some(b) = s_.beta {
            let _ = writeln!(s, "beta         {:.6} {:+.6}i", b.re, b.im);
        }
        let _ = writeln!(s, "bent modes   {} frequencies, {} corner candidates", s_.bent.len(), s_.candidates.len());
        for c in &self.criteria {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            let _ = writeln!(s, "criterion {:>2} {:<26} {tag}  {}", c.id, c.name, c.detail());
        }
        let _ = writeln!(s, "{}", if self.all_passed { "all criteria pass" } else { "some criteria fail" });
        s
    }
}

fn load<T: DeserializeOwned>(artifacts: &[StageArtifact], stage: Stage) -> Result<Option<T>, PipelineError> {
    let Some(a) = artifacts.iter().find(|a| a.stage == stage) else { return Ok(None) };
    let Some(p) = a.json_path() else { return Ok(None) };
    Ok(Some(serde_json::from_str(&std::fs::read_to_string(p)?)?))
}

pub fn load_payloads(artifacts: &[StageArtifact]) -> Result<Payloads, PipelineError> {
    Ok(Payloads {
        dirac: load(artifacts, Stage::Dirac)?,
        gap: load(artifacts, Stage::Gap)?,
        interface: load(artifacts, Stage::Interface)?,
        green: load(artifacts, Stage::Green)?,
        bend: load(artifacts, Stage::Bend)?,
        scan: load(artifacts, Stage::Scan)?,
    })
}

fn summarize(p: &Payloads) -> Summary {
    let ratios = |s: &Option<crate::payload::BendSummary>| s.as_ref().map(|s| (s.l_l / s.r_l, s.r_r / s.r_l, s.l_r / s.r_l));
    Summary {
        lambda_star: p.dirac.as_ref().map(|d| d.dirac.lambda_star),
        bulk_gap: p.gap.as_ref().map(|g| g.gap.interval),
        strip_gap: p.interface.as_ref().map(|i| i.gap),
        i0: p.interface.as_ref().map(|i| i.i0),
        beta: p.interface.as_ref().map(|i| i.reflection.beta()),
        flux_error: p.interface.as_ref().map(|i| i.flux_error()),
        bent: p
            .bend
            .iter()
            .flat_map(|b| &b.sweep)
            .map(|b| BentCoefficients { lambda: b.lambda, odd: ratios(&b.odd), even: ratios(&b.even) })
            .collect(),
        candidates: p
            .scan
            .iter()
            .flat_map(|s| &s.report.candidates)
            .map(|c| CornerSummary { lambda: c.lambda, operator: c.operator.clone(), sigma_ratio: c.sigma_ratio })
            .collect(),
    }
}

/// Evaluates the enabled criteria over the artifacts' payloads.
pub fn emit_report(cfg: &RunConfig, artifacts: &[StageArtifact]) -> Result<Report, PipelineError> {
    if artifacts.is_empty() {
        return Err(PipelineError::NoArtifacts);
    }
    let payloads = load_payloads(artifacts)?;
    let criteria = evaluate(cfg, &payloads);
    let all_passed = criteria.iter().all(|c| c.status == Status::Pass);
    Ok(Report { config: cfg.clone(), artifacts: artifacts.to_vec(), summary: summarize(&payloads), criteria, all_passed })
}
