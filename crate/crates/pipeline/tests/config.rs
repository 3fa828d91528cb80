use pipeline::{ConfigError, RunConfig};
use proptest::prelude::*;

#[test]
fn default_round_trips_through_toml() {
    let cfg = RunConfig::default();
    let back = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
    assert_eq!(cfg, back);
}

#[test]
fn empty_document_is_the_default() {
    assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
}

#[test]
fn partial_document_keeps_other_defaults() {
    let cfg = RunConfig::from_toml_str("[medium]\ndelta = 0.08\n[discretization]\nhalf_width = 6.0\n").unwrap();
    assert_eq!(cfg.medium.delta, 0.08);
    assert_eq!(cfg.discretization.half_width(), 6.0);
    assert_eq!(cfg.sweeps, RunConfig::default().sweeps);
}

#[test]
fn full_line_window_by_default() {
    let d = RunConfig::default().discretization;
    assert_eq!(d.half_width(), d.t_cells as f64);
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(matches!(RunConfig::from_toml_str("[medium]\ndelat = 0.1\n"), Err(ConfigError::Parse(_))));
    assert!(matches!(RunConfig::from_toml_str("colour = 1\n"), Err(ConfigError::Parse(_))));
}

#[test]
fn nonpositive_tolerance_is_rejected() {
    for doc in ["[tolerances]\nflux = 0.0\n", "[tolerances]\ndtn = -1.0\n", "[tolerances]\nlayer = nan\n"] {
        assert!(matches!(RunConfig::from_toml_str(doc), Err(ConfigError::Invalid(_))), "{doc}");
    }
}

#[test]
fn window_wider_than_strip_is_rejected() {
    assert!(RunConfig::from_toml_str("[discretization]\nhalf_width = 9.0\n").is_err());
    assert!(RunConfig::from_toml_str("[discretization]\nhalf_width = 0.0\n").is_err());
}

#[test]
fn criteria_outside_range_are_rejected() {
    assert!(RunConfig::from_toml_str("criteria = [0]\n").is_err());
    assert!(RunConfig::from_toml_str("criteria = [13]\n").is_err());
    assert!(RunConfig::from_toml_str("criteria = [3, 7]\n").is_ok());
}

#[test]
fn farfield_probe_must_fit_in_reach() {
    assert!(RunConfig::from_toml_str("[sweeps]\nfarfield_probe = 39\n").is_err());
    assert!(RunConfig::from_toml_str("[sweeps]\nfarfield_probe = 38\n").is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valid_configs_round_trip(
        delta in 0.0..0.2f64,
        resolution in 2usize..16,
        t_cells in 2usize..12,
        frac in 0.05..1.0f64,
        flux in 1e-6..1.0f64,
        workers in 0usize..8,
    ) {
        let mut cfg = RunConfig::default();
        cfg.medium.delta = delta;
        cfg.discretization.resolution = resolution;
        cfg.discretization.t_cells = t_cells;
        cfg.discretization.half_width = Some(frac * t_cells as f64);
        cfg.tolerances.flux = flux;
        cfg.workers = workers;
        cfg.validate().unwrap();
        prop_assert_eq!(RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }

    #[test]
    fn arbitrary_text_never_panics(s in "\\PC{0,200}") {
        let _ = RunConfig::from_toml_str(&s);
    }
}
