use lattice::fourier::CoefficientModel;
use lattice::{build_medium, fourier_coefficients, Field, MediumParams, MediumSpec};
use num_complex::Complex64;
use rustfft::FftPlanner;

const N: usize = 256;

/// 2D FFT of samples on the `(i e1 + j e2) / N` cell grid, normalised to cell averages.
fn grid_spectrum(m: &MediumSpec, f: impl Fn(&MediumSpec, &lattice::Vec2) -> f64) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = m.cell_grid(N).iter().map(|x| Complex64::new(f(m, x), 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(N);
    for row in data.chunks_mut(N) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); N];
    for i in 0..N {
        for j in 0..N {
            col[j] = data[j * N + i];
        }
        fft.process(&mut col);
        for j in 0..N {
            data[j * N + i] = col[j];
        }
    }
    let scale = 1.0 / (N * N) as f64;
    data.iter().map(|v| v * scale).collect()
}

fn at(spec: &[Complex64], m1: i32, m2: i32) -> Complex64 {
    let w = |m: i32| m.rem_euclid(N as i32) as usize;
    spec[w(m2) * N + w(m1)]
}

#[test]
fn analytic_coefficients_match_fft_of_samples() {
    let m = build_medium(&MediumParams::default()).unwrap();
    let model = CoefficientModel::new(&m);
    let sa = grid_spectrum(&m, |m, x| m.a(x));
    let sb = grid_spectrum(&m, |m, x| m.b(x));
    let mut worst: f64 = 0.0;
    for m1 in -6..=6 {
        for m2 in -6..=6 {
            let da = model.coefficient(Field::A, (m1, m2)) - at(&sa, m1, m2);
            let db = model.coefficient(Field::B, (m1, m2)) - at(&sb, m1, m2);
            worst = worst.max(da.norm()).max(db.norm());
        }
    }
    assert!(worst < 1e-9, "max deviation {worst:e}");
}

#[test]
fn parseval_against_grid_norm() {
    let m = build_medium(&MediumParams::default()).unwrap();
    let mean_sq: f64 = m.cell_grid(N).iter().map(|x| m.a(x).powi(2)).sum::<f64>() / (N * N) as f64;
    let t = fourier_coefficients(&m, Field::A, 400.0).unwrap();
    let sum: f64 = t.values.iter().map(|v| v.norm_sqr()).sum();
    assert!(((sum - mean_sq) / mean_sq).abs() < 1e-6, "{sum} vs {mean_sq}");
}

#[test]
fn plain_honeycomb_coefficients_are_symmetric() {
    let m = build_medium(&MediumParams::plain_honeycomb()).unwrap();
    let g = &m.geometry;
    let t = fourier_coefficients(&m, Field::A, 7.0 * g.e1s.norm()).unwrap();
    let rot = t.set.permutation(g, &lattice::SymmetryOp::rotation()).unwrap();
    for (i, &j) in rot.iter().enumerate() {
        assert!((t.values[i] - t.values[j]).norm() < 1e-10);
        let (m1, m2) = t.set.indices[i];
        let neg = t.get((-m1, -m2)).unwrap();
        assert!((neg - t.values[i].conj()).norm() < 1e-12);
    }
}
