use pipeline::{emit_report, input_hash, Pipeline, PipelineError, RunConfig, Stage};
use std::path::Path;

fn small(dir: &Path) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.discretization.shells = 3.0;
    cfg.sweeps.path_per_leg = 4;
    cfg.sweeps.path_bands = 3;
    cfg.output.dir = dir.join("out");
    cfg.output.stage_cache = Some(dir.join("cache"));
    cfg
}

#[test]
fn hashes_are_deterministic_and_distinct() {
    let cfg = RunConfig::default();
    let hashes: Vec<String> = Stage::ALL.iter().map(|&s| input_hash(&cfg, s)).collect();
    assert_eq!(hashes, Stage::ALL.iter().map(|&s| input_hash(&cfg, s)).collect::<Vec<_>>());
    for (i, a) in hashes.iter().enumerate() {
        assert_eq!(a.len(), 64);
        assert!(hashes[i + 1..].iter().all(|b| a != b));
    }
}

#[test]
fn delta_reaches_only_perturbed_stages() {
    let a = RunConfig::default();
    let mut b = a.clone();
    b.medium.delta = 0.07;
    for s in [Stage::Bands, Stage::Dirac] {
        assert_eq!(input_hash(&a, s), input_hash(&b, s), "{}", s.name());
    }
    for s in [Stage::Gap, Stage::Interface, Stage::Green, Stage::Bend, Stage::Scan] {
        assert_ne!(input_hash(&a, s), input_hash(&b, s), "{}", s.name());
    }
}

#[test]
fn upstream_change_propagates() {
    let a = RunConfig::default();
    let mut b = a.clone();
    b.discretization.kappa_samples += 1;
    assert_ne!(input_hash(&a, Stage::Bend), input_hash(&b, Stage::Bend));
    assert_eq!(input_hash(&a, Stage::Gap), input_hash(&b, Stage::Gap));
    // the contour only feeds the downstream stages
    b = a.clone();
    b.contour.eta = 0.12;
    assert_eq!(input_hash(&a, Stage::Interface), input_hash(&b, Stage::Interface));
    assert_ne!(input_hash(&a, Stage::Green), input_hash(&b, Stage::Green));
}

#[test]
fn downstream_stage_alone_needs_upstream() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = Pipeline::new(small(dir.path())).unwrap();
    for s in [Stage::Gap, Stage::Green, Stage::Bend, Stage::Scan] {
        assert!(matches!(p.run_stage_only(s), Err(PipelineError::MissingUpstream { .. })), "{}", s.name());
    }
}

#[test]
fn report_without_artifacts_is_an_error() {
    assert!(matches!(emit_report(&RunConfig::default(), &[]), Err(PipelineError::NoArtifacts)));
}

#[test]
fn invalid_config_is_refused() {
    let mut cfg = RunConfig::default();
    cfg.tolerances.flux = 0.0;
    assert!(matches!(Pipeline::new(cfg), Err(PipelineError::Config(_))));
}

#[test]
fn bands_stage_is_cached_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let first = Pipeline::new(cfg.clone()).unwrap().run_stage(Stage::Bands).unwrap();
    assert!(!first.cached);
    assert_eq!(first.input_hash, input_hash(&cfg, Stage::Bands));
    let text = std::fs::read_to_string(&first.payload[0]).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "arc,kx,ky,lambda1,lambda2,lambda3");
    // three legs of four steps plus the closing point
    assert_eq!(rows.len(), 1 + 3 * 4 + 1);

    let second = Pipeline::new(cfg.clone()).unwrap().run_stage(Stage::Bands).unwrap();
    assert!(second.cached);
    assert_eq!(second.payload, first.payload);

    let mut fresh = cfg.clone();
    fresh.output.stage_cache = None;
    let third = Pipeline::new(fresh).unwrap().run_stage(Stage::Bands).unwrap();
    assert!(!third.cached);
    assert_eq!(std::fs::read_to_string(&third.payload[0]).unwrap(), text);
}

#[test]
fn report_over_bands_alone_skips_the_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = Pipeline::new(small(dir.path())).unwrap();
    p.run_stage(Stage::Bands).unwrap();
    let r = emit_report(p.config(), &p.artifacts()).unwrap();
    assert_eq!(r.criteria.len(), 12);
    assert!(r.criteria.iter().all(|c| c.status == pipeline::Status::Skipped));
    assert!(!r.all_passed);
}
