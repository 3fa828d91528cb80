use lattice::{build_geometry, build_medium, MediumParams, SymmetryOp, Vec2};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Vec2> {
    (-6.0f64..6.0, -6.0f64..6.0).prop_map(|(a, b)| Vec2::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fold_to_cell_is_idempotent(x in point()) {
        let g = build_geometry();
        let f = g.fold_to_cell(&x);
        let ff = g.fold_to_cell(&f);
        prop_assert!((f - ff).norm() < 1e-12);
        let c = g.lattice_coords(&(x - f));
        prop_assert!((c - c.map(f64::round)).norm() < 1e-9);
    }

    #[test]
    fn fold_to_bz_stays_in_class(k in point()) {
        let g = build_geometry();
        let f = g.fold_to_bz(&k);
        prop_assert!(g.same_class(&f, &k, 1e-9));
    }

    #[test]
    fn coefficients_respect_point_symmetries(x in point()) {
        let m = build_medium(&MediumParams::default()).unwrap();
        for op in [SymmetryOp::rotation(), SymmetryOp::reflection()] {
            let y = op.apply(&x);
            prop_assert!((m.a(&y) - m.a(&x)).abs() < 1e-10);
            prop_assert!((m.b(&y) - m.b(&x)).abs() < 1e-10);
        }
        let y = SymmetryOp::inversion().apply(&x);
        prop_assert!((m.a(&y) - m.a(&x)).abs() < 1e-10);
        prop_assert!((m.b(&y) + m.b(&x)).abs() < 1e-10);
    }

    #[test]
    fn coefficients_are_periodic(x in point(), i in -3i32..3, j in -3i32..3) {
        let m = build_medium(&MediumParams::default()).unwrap();
        let g = &m.geometry;
        let y = x + i as f64 * g.e1 + j as f64 * g.e2;
        prop_assert!((m.a(&y) - m.a(&x)).abs() < 1e-10);
        prop_assert!((m.b(&y) - m.b(&x)).abs() < 1e-10);
    }

    #[test]
    fn b_vanishes_near_the_interface(x1 in -10.0f64..10.0, x2 in -0.0499f64..0.0499) {
        let m = build_medium(&MediumParams::default()).unwrap();
        prop_assert_eq!(m.b(&Vec2::new(x1, x2)), 0.0);
    }

    #[test]
    fn bent_medium_is_continuous_across_the_auxiliary_line(t in -6.0f64..6.0) {
        let m = build_medium(&MediumParams::default()).unwrap();
        let x = m.geometry.from_strip(0.0, t);
        let right = m.a_interface(&SymmetryOp::rotation().apply(&x));
        prop_assert!((m.a_interface(&x) - right).abs() < 1e-10);
    }

    #[test]
    fn bent_medium_is_continuous_across_the_interface(x1 in -6.0f64..-0.01) {
        let m = build_medium(&MediumParams::default()).unwrap();
        let up = m.a_bend(&Vec2::new(x1, 1e-14));
        let down = m.a_bend(&Vec2::new(x1, -1e-14));
        prop_assert!((up - down).abs() < 1e-10);
    }

    #[test]
    fn radius_limit_is_enforced(r0 in 0.01f64..0.4, l in 0.0f64..0.2) {
        let p = MediumParams { radius: r0, clearance: l.max(1e-3), ..MediumParams::plain_honeycomb() };
        let ok = r0 < lattice::sqrt3() / 6.0 - l.max(1e-3);
        prop_assert_eq!(build_medium(&p).is_ok(), ok);
    }
}
