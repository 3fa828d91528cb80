use lattice::{build_medium, MediumParams};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use stripmodes::*;

fn constant(t: usize) -> StripOperator {
    let m = build_medium(&MediumParams::constant(1.0)).unwrap();
    StripOperator::new(&m, Coefficient::Constant(1.0), 8, t)
}

#[test]
fn pencil_is_hermitian_for_real_kappa() {
    let med = build_medium(&MediumParams::default()).unwrap();
    let op = StripOperator::interface(&med, 8, 2);
    for k in [-2.7, 0.0, 0.9, 2.1] {
        let d = op.assemble(C64::new(k, 0.0));
        assert!(d.k.hermitian_defect() < 1e-12 * 80.0);
        assert!(d.m.hermitian_defect() < 1e-16);
    }
}

#[test]
fn bloch_phase_has_period_two_pi() {
    let med = build_medium(&MediumParams::default()).unwrap();
    let op = StripOperator::interface(&med, 8, 1);
    let a = op.assemble(C64::new(0.7, 0.0));
    let b = op.assemble(C64::new(0.7 + 2.0 * PI, 0.0));
    let diff = a.k.axpy(C64::new(-1.0, 0.0), &b.k);
    let scale = a.k.val.iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(diff.val.iter().all(|v| v.norm() <= 1e-13 * scale));
}

#[test]
fn gamma_and_interface_are_grid_lines() {
    let op = constant(2);
    let g = &op.mesh.geom;
    for r in 0..op.mesh.rows() {
        let (s, _) = g.lattice.to_strip(&g.point((0, op.mesh.row_of(r))));
        assert!(s.abs() < 1e-14);
    }
    for i in 0..8 {
        let x = g.point((i, 0));
        assert!(x[1].abs() < 1e-14);
    }
}

#[test]
fn constant_medium_matches_transverse_dirichlet_oracle() {
    // lowest mode of -Laplace on a width-2T|g_perp| channel at kappa = 0
    let t = 8;
    let op = constant(t);
    let d = op.assemble(C64::new(0.0, 0.0));
    let width = 2.0 * t as f64 * lattice::sqrt3() / 2.0;
    let exact = (PI / width).powi(2);
    let ev = eigs_near(&d, 0.0, 0.2, &LanczosSettings::default()).unwrap();
    let rel = (ev[0].lambda - exact).abs() / exact;
    assert!(rel < 0.02, "{} vs {exact}", ev[0].lambda);
}

#[test]
fn returned_pairs_satisfy_rayleigh_quotient() {
    let med = build_medium(&MediumParams::default()).unwrap();
    let op = StripOperator::interface(&med, 8, 2);
    let d = op.assemble(C64::new(2.0, 0.0));
    let ev = eigs_near(&d, 26.7, 2.5, &LanczosSettings::default()).unwrap();
    assert!(!ev.is_empty());
    for p in &ev {
        assert!((d.rayleigh(&p.vector) - p.lambda).abs() < 1e-10 * p.lambda);
        assert!((d.m_inner(&p.vector, &p.vector).re - 1.0).abs() < 1e-12);
    }
}

#[test]
fn cell_dirac_point_is_degenerate_and_converges_towards_plane_waves() {
    let med = build_medium(&MediumParams::default()).unwrap();
    let coarse = discrete_dirac_point(&med, 8);
    let fine = discrete_dirac_point(&med, 16);
    assert!(coarse.split <= 1e-8 * coarse.lambda_star);
    assert!(fine.split <= 1e-8 * fine.lambda_star);
    // plane-wave value at seven shells, from the bulk solver
    let pw = 25.6922;
    assert!((fine.lambda_star - pw).abs() < (coarse.lambda_star - pw).abs());
    assert!((coarse.lambda_star - pw).abs() / pw < 0.05);
}

#[test]
fn cell_gap_opens_around_the_dirac_point() {
    let med = build_medium(&MediumParams::default()).unwrap();
    let dp = discrete_dirac_point(&med, 8);
    let gap = discrete_gap(&med, 8, 12).unwrap();
    assert!(gap.0 < dp.lambda_star && dp.lambda_star < gap.1);
    let flat = build_medium(&MediumParams::default().with_delta(0.0)).unwrap();
    assert!(discrete_gap(&flat, 8, 12).is_none_or(|g| g.1 - g.0 < 1e-6));
}

#[test]
fn hellmann_feynman_matches_finite_difference() {
    let med = build_medium(&MediumParams::default()).unwrap();
    let op = StripOperator::interface(&med, 8, 2);
    let pick = |k: f64| {
        let d = op.assemble(C64::new(k, 0.0));
        eigs_near(&d, 26.7, 0.6, &LanczosSettings::default()).unwrap().into_iter().next().unwrap()
    };
    let k = 2.1;
    let h = 1e-4;
    let p = pick(k);
    let fd = (pick(k + h).lambda - pick(k - h).lambda) / (2.0 * h);
    let hf = op.hellmann_feynman(k, p.lambda, &p.vector);
    assert!((fd - hf).abs() < 1e-5 * hf.abs(), "{fd} {hf}");
}
