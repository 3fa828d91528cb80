use bulkbands::planewave::{self, hermitian_defect, inversion_conjugation};
use bulkbands::*;
use lattice::{build_medium, MediumParams, SymmetryOp};
use std::f64::consts::PI;

fn solver(p: &MediumParams) -> PlaneWaveSolver {
    PlaneWaveSolver::new(&build_medium(p).unwrap(), DEFAULT_SHELLS)
}

#[test]
fn empty_lattice_ground_state_is_constant() {
    let s = solver(&MediumParams::constant(1.0));
    let r = s.solve(lattice::Vec2::zeros(), 1, DeltaSign::Zero).unwrap();
    assert!(r.eigenvalues[0].abs() < 1e-12);
    // the G = 0 wave sits first in the length-sorted basis
    assert!((r.eigenvectors[0][0].norm() - 1.0).abs() < 1e-12);
}

#[test]
fn empty_lattice_at_k_has_triple_free_wave() {
    let s = solver(&MediumParams::constant(1.0));
    let r = s.solve(s.medium.geometry.k, 4, DeltaSign::Zero).unwrap();
    let free = 16.0 * PI * PI / 9.0;
    for l in &r.eigenvalues[..3] {
        assert!((l - free).abs() < 1e-10 * free);
    }
    assert!(r.eigenvalues[3] > free + 1.0);
}

#[test]
fn dirac_point_of_default_medium() {
    let s = solver(&MediumParams::default());
    let d = detect_dirac(&s, &DiracSettings::default()).unwrap();
    assert!(d.split <= 1e-8 * d.lambda_star.max(1.0));
    let slopes: Vec<f64> = d.cones.iter().map(|c| c.slope).collect();
    for w in slopes.windows(2) {
        assert!((w[0] - w[1]).abs() < 0.01 * w[0]);
    }
    assert!(d.cones.iter().all(|c| c.relative_correction < 0.05));
    let (t1, t2) = d.tau_pair();
    assert!((t1 * t2 - 1.0).norm() < 1e-10);
    assert!((t1 - t2).norm() > 1.0);
    assert!((t1.powu(3) - 1.0).norm() < 1e-10);
    assert!((t1 - tau()).norm() < 1e-8);
    assert!(d.pt_residual < 1e-6);
    assert!(d.t_star[1].abs() < 1e-10 * d.t_star[0].abs());
}

#[test]
fn perturbation_identities_hold() {
    let s = solver(&MediumParams::default());
    let d = detect_dirac(&s, &DiracSettings::default()).unwrap();
    let p = perturbation_identities(&d, &s);
    let scale = p.diag_plus[0].hypot(p.diag_plus[1]);
    assert!(scale > 0.0);
    let sum = (p.diag_plus[0] + p.diag_minus[0]).hypot(p.diag_plus[1] + p.diag_minus[1]);
    assert!(sum < 1e-8 * scale);
    assert!(p.offdiag[0].hypot(p.offdiag[1]) < 1e-8 * scale);
}

#[test]
fn perturbation_vanishes_without_b() {
    let p = MediumParams { amp_b: 0.0, ..MediumParams::default() };
    let s = solver(&p);
    let d = detect_dirac(&s, &DiracSettings::default()).unwrap();
    let r = perturbation_identities(&d, &s);
    assert_eq!(r.diag_plus, [0.0, 0.0]);
    assert_eq!(r.diag_minus, [0.0, 0.0]);
    assert_eq!(r.offdiag, [0.0, 0.0]);
}

#[test]
fn u2_is_conjugated_inversion_of_u1() {
    let s = solver(&MediumParams::default());
    let d = detect_dirac(&s, &DiracSettings::default()).unwrap();
    let res = d.at_k.as_ref().unwrap();
    let ru2 = bulkbands::planewave::symmetry_action(res, &s.medium.geometry, &SymmetryOp::rotation(), &d.u2).unwrap();
    let tau_bar = tau().conj();
    let err: f64 = ru2.iter().zip(&d.u2).map(|(a, b)| (a - b * tau_bar).norm_sqr()).sum::<f64>().sqrt();
    assert!(err < 1e-8);
    let back = inversion_conjugation(&d.u2);
    let err: f64 = back.iter().zip(&d.u1).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    assert!(err < 1e-14);
}

#[test]
fn gap_matches_first_order_and_bands_invert() {
    let s = solver(&MediumParams::default());
    let d = detect_dirac(&s, &DiracSettings::default()).unwrap();
    let g = gap_and_inversion(&s, &d, 12).unwrap();
    assert!(((g.width - g.predicted_width) / g.predicted_width).abs() < 0.1);
    assert!(g.inversion);
    assert!(g.interval.0 < d.lambda_star && d.lambda_star < g.interval.1);
}

#[test]
fn zero_delta_closes_the_gap() {
    let s = solver(&MediumParams::default().with_delta(0.0));
    let d = detect_dirac(&s, &DiracSettings::default()).unwrap();
    assert!(matches!(gap_and_inversion(&s, &d, 6), Err(BandError::GapClosed(_))));
}

#[test]
fn missing_degeneracy_is_reported() {
    // a lone sublattice rod breaks inversion and splits the pair
    let s = solver(&MediumParams::default());
    let basis = s.basis(s.medium.geometry.k).unwrap();
    let a = s.operator(&basis, DeltaSign::Plus);
    assert!(hermitian_defect(&a) < 1e-12);
    let r = s.solve(s.medium.geometry.k, 2, DeltaSign::Plus).unwrap();
    assert!(r.eigenvalues[1] - r.eigenvalues[0] > 0.1);
    let strict = DiracSettings { degeneracy_tol: -1.0, ..DiracSettings::default() };
    assert!(matches!(detect_dirac(&s, &strict), Err(BandError::NoDiracPoint { .. })));
}

#[test]
fn pair_stays_isolated_away_from_the_vertices() {
    let s = solver(&MediumParams::default());
    let d = detect_dirac(&s, &DiracSettings::default()).unwrap();
    let g = &s.medium.geometry;
    let rot = SymmetryOp::rotation();
    let verts: Vec<_> = [g.k, rot.apply(&g.k), rot.apply(&rot.apply(&g.k))]
        .into_iter()
        .flat_map(|k| [k, -k])
        .collect();
    for k in gap::bz_mesh(&s, 12) {
        let r = s.solve(k, 3, DeltaSign::Zero).unwrap();
        assert!(r.eigenvalues[2] > d.lambda_star);
        let near = verts.iter().any(|v| {
            (-2..=2).any(|i| (-2..=2).any(|j| (k - v - i as f64 * g.e1s - j as f64 * g.e2s).norm() < 1.0))
        });
        if !near {
            assert!(r.eigenvalues[0] < d.lambda_star - 0.1, "{k:?}");
            assert!(r.eigenvalues[1] > d.lambda_star + 0.1, "{k:?}");
        }
    }
}

#[test]
fn basis_saturation_at_k() {
    // Galerkin upper bounds fall monotonically; the one-shell change drops below 1e-4 only
    // from 15 shells on for these rods
    let m = build_medium(&MediumParams::plain_honeycomb()).unwrap();
    let lam: Vec<f64> = [7.0, 8.0, 15.0, 16.0]
        .iter()
        .map(|&sh| PlaneWaveSolver::new(&m, sh).solve(m.geometry.k, 2, DeltaSign::Zero).unwrap().eigenvalues[0])
        .collect();
    assert!(lam.windows(2).all(|w| w[1] <= w[0]));
    assert!((lam[2] - lam[3]) / lam[3] < 1e-4);
    assert!(planewave::shell_change(&m, DEFAULT_SHELLS) > 1e-4);
}

#[test]
fn path_visits_corners() {
    let s = solver(&MediumParams::constant(1.0));
    let rows = path::bands_along_path(&s, 4, 2, DeltaSign::Zero).unwrap();
    assert_eq!(rows.len(), 13);
    assert!(rows.windows(2).all(|w| w[1].0 > w[0].0));
}
