//! Out-going Green function at a real frequency in the middle of the interface window.

use num_complex::Complex64 as C64;
use outgreen::*;
use std::sync::OnceLock;
use stripmodes::{discrete_gap, BandSettings, InterfaceBandTable, StripOperator};

struct Fixture {
    tab: InterfaceBandTable,
    lambda: f64,
    g: GreenEvaluator,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let med = lattice::build_medium(&lattice::MediumParams::default()).unwrap();
        let gap = discrete_gap(&med, 8, 18).unwrap();
        let tab = InterfaceBandTable::build(StripOperator::interface(&med, 8, 8), gap, BandSettings::default()).unwrap();
        let lambda = 0.5 * (tab.i0.0 + tab.i0.1);
        let c = build_contour(&tab, C64::new(lambda, 0.0), &ContourSettings::default()).unwrap();
        let g = GreenEvaluator::build(&tab.operator, c, 40).unwrap();
        Fixture { tab, lambda, g }
    })
}

#[test]
fn deformed_contour_spans_one_period() {
    let f = fixture();
    let c = &f.g.contour;
    let total: C64 = c.weights.iter().sum();
    assert!((total - C64::new(2.0 * std::f64::consts::PI, 0.0)).norm() < 1e-12);
    assert!(c.mirror.is_some());
    assert!(c.kappa_plus > 0.0 && c.kappa_minus == -c.kappa_plus);
    assert!(c.clearance > 1e-3, "{}", c.clearance);
    // every node of C1 is on the real line or a semicircle of radius eta about a pole
    for z in &c.nodes {
        let off = z.im.abs() > 1e-14;
        let on_circle = [c.kappa_plus, c.kappa_minus].iter().any(|&p| ((z - p).norm() - c.eta).abs() < 1e-12);
        assert!(!off || on_circle, "{z}");
    }
}

#[test]
fn upper_half_plane_uses_the_real_period() {
    let f = fixture();
    let c = build_contour(&f.tab, C64::new(f.lambda, 0.05), &ContourSettings::default()).unwrap();
    assert!(c.nodes.iter().all(|z| z.im == 0.0));
    let total: C64 = c.weights.iter().sum();
    assert!((total.re - 2.0 * std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn contour_errors_are_reported() {
    let f = fixture();
    let wide = ContourSettings { eta: 2.0, ..Default::default() };
    assert!(matches!(build_contour(&f.tab, C64::new(f.lambda, 0.0), &wide), Err(ContourError::EtaTooLarge { .. })));
    let outside = f.tab.i0.1 + 10.0;
    assert_eq!(
        build_contour(&f.tab, C64::new(outside, 0.0), &ContourSettings::default()),
        Err(ContourError::OutsideWindow(outside))
    );
}

#[test]
fn field_solves_the_strip_equations_off_source() {
    let f = fixture();
    let op = &f.tab.operator;
    let mut s = vec![C64::new(0.0, 0.0); op.mesh.len()];
    s[op.mesh.locate((3, 2)).unwrap().1] = C64::new(1.0, 0.0);
    let u = f.g.apply(&s).unwrap();
    let r = u.residual(op, C64::new(f.lambda, 0.0), &s);
    assert!(r < 1e-6, "{r:e}");
}

#[test]
fn blocks_do_not_depend_on_the_radius() {
    let f = fixture();
    let d = contour_independence(&f.tab, f.lambda, 0.15, 0.1, &ContourSettings::default()).unwrap();
    assert!(d < 1e-6, "{d:e}");
}

#[test]
fn kernel_is_reflection_covariant() {
    let f = fixture();
    let pairs = [((5, 7), (3, 2)), ((20, -30), (1, 0)), ((-9, 4), (6, -5))];
    let c = reflection_covariance(&f.g, &f.tab.operator, &pairs).unwrap();
    assert!(c < 1e-6, "{c:e}");
}

#[test]
fn far_field_carries_the_out_going_modes() {
    let f = fixture();
    let (up, um) = f.tab.mode_pair(f.lambda).unwrap();
    let ff = farfield_along_e(&f.g, &f.tab.operator, &up, &um, (3, 2), 30, 20).unwrap();
    assert!(ff.amplitude_error_plus < 0.05 && ff.amplitude_error_minus < 0.05, "{ff:?}");
    assert!(ff.decay_rate_plus > 0.0 && ff.decay_rate_minus > 0.0);
    assert!(ff.r_squared_plus > 0.98 && ff.r_squared_minus > 0.98, "{ff:?}");
}

#[test]
fn transverse_decay_away_from_the_interface() {
    let f = fixture();
    let td = transverse_decay_check(&f.g, &f.tab.operator, (3, 2)).unwrap();
    assert!(td.rate > 0.0, "{td:?}");
    assert!(td.ratio_4_2 < 1.0, "{td:?}");
}
