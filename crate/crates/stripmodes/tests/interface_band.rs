use lattice::{build_medium, MediumParams};
use std::f64::consts::PI;
use std::sync::OnceLock;
use stripmodes::*;

fn table() -> &'static InterfaceBandTable {
    static T: OnceLock<InterfaceBandTable> = OnceLock::new();
    T.get_or_init(|| {
        let med = build_medium(&MediumParams::default()).unwrap();
        let gap = discrete_gap(&med, 8, 18).unwrap();
        InterfaceBandTable::build(StripOperator::interface(&med, 8, 8), gap, BandSettings::default()).unwrap()
    })
}

#[test]
fn exactly_one_in_gap_eigenvalue_near_the_valleys() {
    let t = table();
    for target in [2.0 * PI / 3.0, -2.0 * PI / 3.0] {
        let near: Vec<usize> = (0..t.kappa.len()).filter(|&i| (t.kappa[i] - target).abs() < 0.06).collect();
        let with_mode = near.iter().filter(|&&i| t.flags[i].is_none()).count();
        assert!(with_mode >= 2);
        assert!(near.iter().all(|&i| !matches!(t.flags[i], Some(SampleFlag::MultipleInGapModes(_)))));
    }
}

#[test]
fn slopes_are_mirror_images() {
    let t = table();
    let k = t.kappa_of_lambda(0.5 * (t.i0.0 + t.i0.1)).unwrap();
    assert!(k.slope_plus > 0.0 && k.slope_minus < 0.0);
    assert!((k.slope_plus + k.slope_minus).abs() < 0.01 * k.slope_plus);
    assert!((k.kappa_plus + k.kappa_minus).abs() < 1e-9);
}

#[test]
fn inverse_map_recovers_a_fresh_eigensolve() {
    let t = table();
    let k0 = t.kappa_of_lambda(0.5 * (t.i0.0 + t.i0.1)).unwrap().kappa_plus + 0.01;
    let guess = t.interpolate(k0).unwrap().0;
    let m = t.mode_at(k0, guess).unwrap();
    let back = t.kappa_of_lambda(m.lambda).unwrap();
    assert!((back.kappa_plus - k0).abs() < 1e-6, "{} vs {k0}", back.kappa_plus);
}

#[test]
fn outside_window_is_rejected() {
    let t = table();
    assert!(matches!(t.kappa_of_lambda(t.i0.1 + 0.5), Err(BandTableError::OutsideWindow(_))));
    assert!(matches!(t.kappa_of_lambda(f64::NAN), Err(BandTableError::OutsideWindow(_))));
}

#[test]
fn table_is_periodic_and_isolated() {
    let t = table();
    let (a, b) = (&t.spectra[0], &t.spectra[t.kappa.len() - 1]);
    assert_eq!(a.len(), b.len());
    assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9 * x));
    assert!(t.d_star > 0.0 && t.d_star.is_finite());
    assert!(t.rayleigh_defect() < 1e-10);
}

#[test]
fn difference_slopes_match_hellmann_feynman() {
    let t = table();
    let i = (t.plus.0 + t.plus.1) / 2;
    let m = t.mode_at(t.kappa[i], t.lambda[i].unwrap()).unwrap();
    assert!((t.slope[i].unwrap() - m.slope).abs() < 1e-4 * m.slope.abs());
}

#[test]
fn modes_are_phase_fixed_and_normalized() {
    let t = table();
    let mesh = &t.operator.mesh;
    let anchor = mesh.index(0, mesh.row_index(0).unwrap());
    for u in t.modes.iter().flatten() {
        let big = u.iter().max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap()).unwrap();
        // modes odd across the interface vanish there and fall back to their largest sample
        let z = if u[anchor].norm() > 1e-8 * big.norm() { u[anchor] } else { *big };
        assert!(z.im.abs() < 1e-12 && z.re > 0.0, "{z}");
    }
}

#[test]
fn energy_flux_is_the_group_velocity() {
    let t = table();
    let (up, um) = t.mode_pair(0.5 * (t.i0.0 + t.i0.1)).unwrap();
    let s = up.slope.abs();
    for col in [0, 1, 5] {
        let pp = energy_flux(&t.operator, &up, &up, col);
        let mm = energy_flux(&t.operator, &um, &um, col);
        let pm = energy_flux(&t.operator, &up, &um, col);
        assert!((pp - num_complex::Complex64::new(0.0, up.slope)).norm() < 0.02 * s);
        assert!((mm - num_complex::Complex64::new(0.0, um.slope)).norm() < 0.02 * s);
        assert!(pm.norm() < 0.02 * s);
    }
}

#[test]
fn reflected_mode_is_a_unimodular_multiple() {
    let t = table();
    let r = reflection_relation(t, 0.5 * (t.i0.0 + t.i0.1)).unwrap();
    assert!((r.beta().norm() - 1.0).abs() < 1e-6);
    assert!(r.residual < 1e-8);
    assert!(r.involution < 1e-14);
    for e in [r.trace_minus, r.conormal_minus, r.trace_plus, r.conormal_plus] {
        assert!(e < 0.01);
    }
}

#[test]
fn one_sided_conormals_agree_for_modes() {
    let t = table();
    let (up, _) = t.mode_pair(t.i0.0 + 0.3 * (t.i0.1 - t.i0.0)).unwrap();
    let tr = mode_trace(&t.operator, &up, 0);
    let scale = tr.conormal.iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(tr.mismatch < 1e-8 * scale);
}

#[test]
fn slab_norms_fall_off_away_from_the_interface() {
    let t = table();
    let (up, _) = t.mode_pair(0.5 * (t.i0.0 + t.i0.1)).unwrap();
    let fit = transverse_decay(&t.operator, &up);
    assert!(fit.rate > 0.0);
    assert_eq!(fit.slabs.len(), 16);
}
