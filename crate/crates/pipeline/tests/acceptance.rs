//! All twelve acceptance criteria on the default configuration.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` are evaluated and reported but not asserted.

use pipeline::{emit_report, Pipeline, RunConfig, Stage, Status};
use std::io::Write;

/// Criteria that fail at the default discretization for reasons recorded in the decision log.
const KNOWN_UNATTAINABLE: &[u8] = &[];

#[test]
fn acceptance_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.output.dir = dir.path().to_path_buf();
    let mut p = Pipeline::new(cfg).unwrap();
    for s in Stage::ALL {
        p.run_stage(s).unwrap_or_else(|e| panic!("stage {}: {e}", s.name()));
    }
    let report = emit_report(p.config(), &p.artifacts()).unwrap();
    assert_eq!(report.criteria.len(), 12);

    let mut unexpected = Vec::new();
    for c in &report.criteria {
        let known = KNOWN_UNATTAINABLE.contains(&c.id);
        let tag = match (c.status, known) {
            (Status::Pass, _) => "PASS",
            (_, true) => "FAIL (known)",
            _ => "FAIL",
        };
        // straight to the handle so the lines survive test output capture
        writeln!(std::io::stderr(), "criterion {} ({}): {tag}  {}", c.id, c.name, c.detail()).unwrap();
        if c.status != Status::Pass && !known {
            unexpected.push(c.id);
        }
    }
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
