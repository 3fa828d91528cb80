//! Exact discrete identities of the layer operators on a small strip.
//!
//! At `Im lambda = 1` the symbol is analytic in a band around the real period, so the periodic
//! trapezoid rule converges geometrically and no band table is needed.

use layerpot::*;
use num_complex::Complex64 as C64;
use outgreen::{ContourSpec, GreenEvaluator};
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;
use stripmodes::{line_conormals, StripOperator};

const N: usize = 4;
const T: usize = 2;

struct Fixture {
    op: StripOperator,
    g: GreenEvaluator,
    ops: BoundaryOperatorSet,
}

fn trapezoid(lambda: C64, nodes: usize) -> ContourSpec {
    let h = 2.0 * PI / nodes as f64;
    ContourSpec {
        lambda,
        eta: 0.0,
        kappa_plus: 0.0,
        kappa_minus: 0.0,
        nodes: (0..nodes).map(|k| C64::new(-PI + (k as f64 + 0.5) * h, 0.0)).collect(),
        weights: vec![C64::new(h, 0.0); nodes],
        mirror: None,
        clearance: f64::INFINITY,
    }
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let med = lattice::build_medium(&lattice::MediumParams::default()).unwrap();
        let op = StripOperator::interface(&med, N, T);
        let g = GreenEvaluator::build(&op, trapezoid(C64::new(26.6, 1.0), 256), 8).unwrap();
        let ops = assemble_operators(&g, &op, T as f64).unwrap();
        Fixture { op, g, ops }
    })
}

fn max_abs(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

#[test]
fn full_line_window_covers_every_row() {
    let f = fixture();
    assert_eq!(f.ops.len(), f.op.mesh.rows());
    assert_eq!(f.ops.s.nrows(), f.ops.len());
    assert!(f.ops.t.first().unwrap().abs() <= T as f64 + 1e-12);
}

#[test]
fn single_layer_jump_is_exact() {
    let f = fixture();
    let j = single_layer_jump(&f.g, &f.op, &f.ops).unwrap();
    assert!(j.jump < 1e-9, "{j:?}");
    assert!(j.kstar_consistency < 1e-9, "{j:?}");
    assert!(j.s_consistency < 1e-9, "{j:?}");
    assert!(f.ops.jump_residual < 1e-9);
}

#[test]
fn double_layer_jump_is_exact() {
    let f = fixture();
    let j = double_layer_jump(&f.g, &f.op, &f.ops).unwrap();
    assert!(j.jump < 1e-9, "{j:?}");
    assert!(j.k_consistency < 1e-9, "{j:?}");
    assert!(j.n_consistency < 1e-9, "{j:?}");
    assert!(j.conormal_jump < 1e-9, "{j:?}");
}

#[test]
fn calderon_commutator_vanishes_on_the_full_line() {
    let c = calderon_commutator(&fixture().ops);
    assert!(c < 1e-9, "{c:e}");
}

#[test]
fn rotated_relations_hold() {
    let f = fixture();
    let r = rotated_relations(&f.g, &f.op, &f.ops, 1.0, 3).unwrap();
    assert_eq!(r.columns, 3);
    assert!(r.single_layer < 1e-9, "{r:?}");
    assert!(r.kstar < 1e-9, "{r:?}");
}

#[test]
fn regularized_inverse_solves_well_conditioned_systems() {
    let s = &fixture().ops.s;
    let inv = RegularizedInverse::new(s, 1e-14).unwrap();
    assert!(inv.ratio() > 1e-8);
    let x: Vec<C64> = (0..s.ncols()).map(|k| C64::new((k as f64).sin(), 0.5)).collect();
    let b: Vec<C64> = (0..s.nrows()).map(|i| (0..s.ncols()).map(|j| s[(i, j)] * x[j]).sum()).collect();
    let y = inv.solve(&b);
    let err = x.iter().zip(&y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-8 * max_abs(&x), "{err:e}");
}

#[test]
fn truncated_window_is_a_principal_block() {
    let f = fixture();
    let small = assemble_operators(&f.g, &f.op, 1.0).unwrap();
    assert!(small.len() < f.ops.len());
    let offset = f.ops.rows.iter().position(|&r| r == small.rows[0]).unwrap();
    for i in 0..small.len() {
        for j in 0..small.len() {
            let d = small.k[(i, j)] - f.ops.k[(offset + i, offset + j)];
            assert!(d.norm() < 1e-12, "K differs at {i},{j}");
        }
    }
}

#[test]
fn reflection_about_gamma_fixes_gamma_and_is_an_involution() {
    for j in -20..20 {
        assert_eq!(reflect_about_gamma((0, j)), (0, j));
    }
    for p in [(1, 0), (-3, 7), (5, -11)] {
        assert_eq!(reflect_about_gamma(reflect_about_gamma(p)), p);
    }
}

fn density_strategy(len: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pairing_is_hermitian(a in density_strategy(47), b in density_strategy(47)) {
        let ops = &fixture().ops;
        let ab = ops.pairing(&a, &b);
        let ba = ops.pairing(&b, &a);
        prop_assert!((ab - ba.conj()).norm() < 1e-12 * (1.0 + ab.norm()));
        prop_assert!(ops.pairing(&a, &a).re >= 0.0);
    }

    #[test]
    fn single_layer_jump_holds_for_any_density(phi in density_strategy(47)) {
        let f = fixture();
        prop_assume!(phi.len() == f.ops.len());
        let u = single_layer_field(&f.g, &f.op, &f.ops.load(&phi)).unwrap();
        let c = f.op.coefficient.closure(&f.op.medium);
        let field = |p| u.value(&f.op, p).unwrap_or_default();
        let (right, left) = line_conormals(&f.op.mesh, &c, &field, f.ops.lambda, 0);
        let (dr, dl) = (f.ops.density(&right), f.ops.density(&left));
        let jump: Vec<C64> = dr.iter().zip(&dl).zip(&phi).map(|((r, l), p)| r - l + p).collect();
        prop_assert!(max_abs(&jump) < 1e-8 * max_abs(&phi));
    }
}
