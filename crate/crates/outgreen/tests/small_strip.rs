//! Green function on a small strip at `Im lambda = 1`, where the real period is a valid contour
//! and the truncated chain is an independent solver.

use num_complex::Complex64 as C64;
use outgreen::*;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;
use stripmodes::StripOperator;

const LAMBDA: C64 = C64::new(26.6, 1.0);

struct Fixture {
    op: StripOperator,
    g: GreenEvaluator,
}

fn trapezoid(nodes: usize) -> ContourSpec {
    let h = 2.0 * PI / nodes as f64;
    ContourSpec {
        lambda: LAMBDA,
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
        let op = StripOperator::interface(&med, 4, 2);
        let g = GreenEvaluator::build(&op, trapezoid(256), 8).unwrap();
        Fixture { op, g }
    })
}

fn unit_source(op: &StripOperator, y: (i64, i64)) -> Vec<C64> {
    let mut s = vec![C64::new(0.0, 0.0); op.mesh.len()];
    s[op.mesh.locate(y).unwrap().1] = C64::new(1.0, 0.0);
    s
}

#[test]
fn field_solves_the_strip_equations() {
    let f = fixture();
    for y in [(0, 0), (2, 3), (3, -5)] {
        let s = unit_source(&f.op, y);
        let u = f.g.apply(&s).unwrap();
        assert!(u.residual(&f.op, LAMBDA, &s) < 1e-10, "{y:?}");
    }
}

#[test]
fn contour_field_matches_truncated_chain() {
    let f = fixture();
    let s = unit_source(&f.op, (1, 2));
    let u = f.g.apply(&s).unwrap();
    let cells = truncation_cells(LAMBDA, 10.0, 1e-10);
    let chain = truncated_chain(&f.g, &s, cells, 5);
    let d = compare_with_chain(&f.g, &u, &chain);
    assert!(d < 1e-9, "{d:e}");
}

#[test]
fn blocks_are_reciprocal() {
    // a real symmetric operator gives G_{-m} = G_m^T
    let g = &fixture().g;
    for m in 0..4 {
        let (a, b) = (g.block(m).unwrap(), g.block(-m).unwrap());
        assert!((a - b.transpose()).norm_max() < 1e-12 * a.norm_max(), "{m}");
    }
}

#[test]
fn block_out_of_reach_is_an_error() {
    let g = &fixture().g;
    assert!(matches!(g.block(9), Err(GreenError::OutOfRange(9))));
}

#[test]
fn kernel_is_translation_invariant() {
    let f = fixture();
    let n = f.op.mesh.n as i64;
    let a = f.g.kernel(&f.op, (5, 1), (1, 2)).unwrap();
    let b = f.g.kernel(&f.op, (5 + n, 1), (1 + n, 2)).unwrap();
    assert!((a - b).norm() < 1e-13 * a.norm());
}

fn complex() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symbol_is_reciprocal(k in -PI..PI, eta in -0.3f64..0.3) {
        let r = &fixture().g.reduction;
        let z = C64::new(k, eta);
        let d = &r.symbol(-z) - &r.symbol(z).transpose();
        prop_assert!(d.norm_max() < 1e-10 * r.z0.norm_max());
    }

    #[test]
    fn apply_is_linear(a in complex(), b in complex(), i in 0usize..4, j in -6i64..6) {
        let f = fixture();
        let s1 = unit_source(&f.op, (0, 0));
        let s2 = unit_source(&f.op, (i as i64, j));
        let mix: Vec<C64> = s1.iter().zip(&s2).map(|(x, y)| a * x + b * y).collect();
        let u = f.g.apply(&mix).unwrap();
        let v = f.g.apply(&s1).unwrap().combine(a, &f.g.apply(&s2).unwrap(), b);
        for m in -3..=3 {
            for (x, y) in u.cell(m).unwrap().iter().zip(v.cell(m).unwrap()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }
    }
}
