//! Shift-invert Lanczos in the mass inner product.

use crate::assembly::{dot, AssemblyError, StripDiscretization};
use faer::{Mat, Side};
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosSettings {
    pub steps: usize,
    /// Relative Ritz residual below which a pair counts as converged.
    pub tol: f64,
}

impl Default for LanczosSettings {
    fn default() -> Self {
        LanczosSettings { steps: 64, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub lambda: f64,
    /// Normalized so that `u^H M u = 1`.
    pub vector: Vec<C64>,
    pub residual: f64,
}

/// Converged eigenpairs of `K u = lambda M u` with `|lambda - sigma| <= radius`, ascending.
pub fn eigs_near(
    d: &StripDiscretization,
    sigma: f64,
    radius: f64,
    settings: &LanczosSettings,
) -> Result<Vec<Eigenpair>, AssemblyError> {
    let n = d.n;
    let lu = d.factor(C64::new(sigma, 0.0))?;
    let steps = settings.steps.min(n);
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(steps + 1);
    let mut mq: Vec<Vec<C64>> = Vec::with_capacity(steps + 1);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);

    // deterministic start with every Fourier component present
    let start: Vec<C64> = (0..n)
        .map(|i| {
            let x = i as f64;
            C64::new((0.37 * x + 0.1).sin() + 0.5 * (1.91 * x).cos(), (0.73 * x + 0.2).cos())
        })
        .collect();
    let mut v = start;
    let mut mv = d.m.apply(&v);
    let nrm = dot(&v, &mv).re.sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
    mv.iter_mut().for_each(|x| *x /= nrm);
    q.push(v);
    mq.push(mv);

    for j in 0..steps {
        let mut w = lu.solve(&mq[j]);
        let a = dot(&mq[j], &w).re;
        alpha.push(a);
        // two passes of full reorthogonalization keep the basis orthonormal to roundoff
        for _ in 0..2 {
            for (qi, mqi) in q.iter().zip(&mq) {
                let c = dot(mqi, &w);
                w.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
            }
        }
        let mw = d.m.apply(&w);
        let b = dot(&w, &mw).re.max(0.0).sqrt();
        beta.push(b);
        if j + 1 == steps || b < 1e-13 * a.abs().max(1e-300) {
            break;
        }
        q.push(w.iter().map(|x| x / b).collect());
        mq.push(mw.iter().map(|x| x / b).collect());
    }

    let m = alpha.len();
    let t = Mat::from_fn(m, m, |i, k| {
        if i == k {
            alpha[i]
        } else if i + 1 == k {
            beta[i]
        } else if k + 1 == i {
            beta[k]
        } else {
            0.0
        }
    });
    let eig = t.self_adjoint_eigen(Side::Lower).map_err(|e| AssemblyError::Factorization(format!("{e:?}")))?;
    let theta = eig.S().column_vector();
    let s = eig.U();
    let last_beta = *beta.last().unwrap_or(&0.0);

    let mut out = Vec::new();
    for k in 0..m {
        let th = theta[k];
        if th.abs() < 1e-300 {
            continue;
        }
        let lambda = sigma + 1.0 / th;
        if (lambda - sigma).abs() > radius {
            continue;
        }
        let est = (last_beta * s[(m - 1, k)]).abs() / th.abs();
        if est > settings.tol.sqrt() {
            continue;
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        for i in 0..m {
            let c = s[(i, k)];
            x.iter_mut().zip(&q[i]).for_each(|(a, b)| *a += c * b);
        }
        let mx = d.m.apply(&x);
        let nrm = dot(&x, &mx).re.sqrt();
        x.iter_mut().for_each(|a| *a /= nrm);
        let kx = d.k.apply(&x);
        let res = kx.iter().zip(&mx).map(|(a, b)| (a - lambda * b / nrm).norm_sqr()).sum::<f64>().sqrt()
            / (lambda.abs() * mx.iter().map(|b| (b / nrm).norm_sqr()).sum::<f64>().sqrt());
        if res > settings.tol.sqrt() {
            continue;
        }
        out.push(Eigenpair { lambda, vector: x, residual: res });
    }
    out.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap());
    Ok(out)
}
