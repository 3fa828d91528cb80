use lattice::{build_medium, MediumParams, MediumSpec};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::sync::OnceLock;
use stripmodes::mesh::{reflect_node, rotate_node};
use stripmodes::*;

fn medium() -> &'static MediumSpec {
    static M: OnceLock<MediumSpec> = OnceLock::new();
    M.get_or_init(|| build_medium(&MediumParams::default()).unwrap())
}

fn op() -> &'static StripOperator {
    static O: OnceLock<StripOperator> = OnceLock::new();
    O.get_or_init(|| StripOperator::interface(medium(), 8, 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hermitian_for_every_real_kappa(k in -10.0f64..10.0) {
        let d = op().assemble(C64::new(k, 0.0));
        prop_assert!(d.k.hermitian_defect() < 1e-11);
    }

    #[test]
    fn mass_is_positive(k in -3.2f64..3.2, seed in 0u64..1000) {
        let d = op().assemble(C64::new(k, 0.0));
        let u: Vec<C64> = (0..d.n).map(|i| C64::new(((i as u64 * 7 + seed) % 13) as f64 - 6.0, (i % 5) as f64)).collect();
        prop_assert!(d.m_inner(&u, &u).re > 0.0);
        prop_assert!(d.m_inner(&u, &u).im.abs() < 1e-10 * d.m_inner(&u, &u).re);
    }

    #[test]
    fn node_maps_are_involution_and_order_three(i in -50i64..50, j in -50i64..50) {
        prop_assert_eq!(reflect_node(reflect_node((i, j))), (i, j));
        prop_assert_eq!(rotate_node(rotate_node(rotate_node((i, j)))), (i, j));
        // R and F agree on the auxiliary line
        prop_assert_eq!(rotate_node((0, j)), reflect_node((0, j)));
    }

    #[test]
    fn spectrum_is_even_in_kappa(k in 0.1f64..3.0) {
        let a = eigs_near(&op().assemble(C64::new(k, 0.0)), 26.7, 1.0, &LanczosSettings::default()).unwrap();
        let b = eigs_near(&op().assemble(C64::new(-k, 0.0)), 26.7, 1.0, &LanczosSettings::default()).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.lambda - y.lambda).abs() < 1e-9 * x.lambda);
        }
    }

    #[test]
    fn bloch_values_pick_up_the_cell_phase(k in -3.0f64..3.0, cell in -4i64..4, i in 0i64..8, j in -20i64..20) {
        let mesh = &op().mesh;
        let u: Vec<C64> = (0..mesh.len()).map(|x| C64::new(x as f64, 1.0)).collect();
        let kc = C64::new(k, 0.0);
        let a = mesh.bloch_value(&u, kc, (i + 8 * cell, j));
        let b = mesh.bloch_value(&u, kc, (i, j)) * C64::from_polar(1.0, k * cell as f64);
        prop_assert!((a - b).norm() < 1e-9 * (1.0 + a.norm()));
    }
}
