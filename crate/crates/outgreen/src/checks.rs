//! Independent checks of the Green function: truncated chain, far field, symmetry and decay.

use crate::contour::{build_contour, ContourSettings};
use crate::green::{CellField, GreenError, GreenEvaluator};
use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use stripmodes::{linear_fit, InterfaceBandTable, InterfaceMode, RawNode, StripOperator};

/// `Gamma` field of the chain truncated to `|m| <= cells` with zero data beyond, for a source at
/// cell 0, on the cells `-keep..=keep`.
///
/// The chain is swept inward from both ends with the Riccati maps
/// `R_m = (Z0 - Z1 R_{m+1})^-1 Z2` and `L_m = (Z0 - Z2 L_{m-1})^-1 Z1`, which is block Gaussian
/// elimination of the truncated domain.
pub fn truncated_chain(g: &GreenEvaluator, source: &[C64], cells: usize, keep: usize) -> Vec<(i64, Vec<C64>)> {
    let r = &g.reduction;
    let ng = r.gamma.len();
    let s_g: Vec<C64> = r.gamma.iter().map(|&k| source[k]).collect();
    let s_i: Vec<C64> = r.interior.iter().map(|&k| source[k]).collect();
    let xs = r.x.solve(&s_i);
    let pxs = r.p.mul_vec(&xs);
    let r0: Vec<C64> = s_g.iter().zip(&pxs).map(|(a, b)| a - b).collect();
    let r1: Vec<C64> = r.q.mul_vec(&xs).iter().map(|b| -b).collect();

    let sweep = |near: &Mat<C64>, far: &Mat<C64>, upto: i64| -> Vec<Mat<C64>> {
        // maps for m = cells down to upto, with zero data past the end
        let mut out = Vec::new();
        let mut cur = Mat::<C64>::zeros(ng, ng);
        for _ in (upto..=cells as i64).rev() {
            let d = &r.z0 - near * &cur;
            cur = d.partial_piv_lu().solve(far);
            out.push(cur.clone());
        }
        out.reverse();
        out
    };
    // right maps R_m for m = 2..=cells, left maps L_m for m = -1..=-cells stored by |m|
    let right = sweep(&r.z1, &r.z2, 2);
    let left = sweep(&r.z2, &r.z1, 1);
    let r2 = &right[0];
    let l1 = &left[0];
    // two-cell system for x_0, x_1
    let n2 = 2 * ng;
    let a00 = &r.z0 - &r.z2 * l1;
    let a11 = &r.z0 - &r.z1 * r2;
    let sys = Mat::from_fn(n2, n2, |i, j| match (i < ng, j < ng) {
        (true, true) => a00[(i, j)],
        (true, false) => -r.z1[(i, j - ng)],
        (false, true) => -r.z2[(i - ng, j)],
        (false, false) => a11[(i - ng, j - ng)],
    });
    let rhs = Mat::from_fn(n2, 1, |i, _| if i < ng { r0[i] } else { r1[i - ng] });
    let x = sys.partial_piv_lu().solve(&rhs);
    let x0: Vec<C64> = (0..ng).map(|i| x[(i, 0)]).collect();
    let x1: Vec<C64> = (0..ng).map(|i| x[(ng + i, 0)]).collect();
    let mv = |a: &Mat<C64>, v: &[C64]| -> Vec<C64> { (0..ng).map(|i| (0..ng).map(|j| a[(i, j)] * v[j]).sum()).collect() };
    let mut out = vec![(0, x0.clone()), (1, x1.clone())];
    let mut cur = x1;
    for m in 2..=keep as i64 {
        cur = mv(&right[(m - 2) as usize], &cur);
        out.push((m, cur.clone()));
    }
    let mut cur = x0;
    for m in 1..=keep as i64 {
        cur = mv(&left[(m - 1) as usize], &cur);
        out.push((-m, cur.clone()));
    }
    out.sort_by_key(|p| p.0);
    out
}

/// Number of cells per side for a truncation error near `tol` at `Im lambda > 0`.
pub fn truncation_cells(lambda: C64, slope: f64, tol: f64) -> usize {
    let decay = lambda.im / slope.abs();
    ((1.0 / tol).ln() / (2.0 * decay)).ceil() as usize
}

/// `max_m |u_contour - u_chain| / max |u_chain|` on `Gamma` over the kept cells.
pub fn compare_with_chain(g: &GreenEvaluator, field: &CellField, chain: &[(i64, Vec<C64>)]) -> f64 {
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for (m, v) in chain {
        let Some(c) = field.cell(*m) else { continue };
        for (k, &gi) in g.reduction.gamma.iter().enumerate() {
            num = num.max((c[gi] - v[k]).norm());
            den = den.max(v[k].norm());
        }
    }
    num / den
}

/// Far field of a point source along the interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarField {
    /// Predicted amplitude `i / |slope| * conj(u(y))` on each side.
    pub predicted_plus: (f64, f64),
    pub predicted_minus: (f64, f64),
    /// `(m, projected amplitude, remainder norm)` for `m > 0` along `u_+` and `m < 0` along `u_-`.
    pub samples: Vec<(i64, (f64, f64), f64)>,
    pub amplitude_error_plus: f64,
    pub amplitude_error_minus: f64,
    pub decay_rate_plus: f64,
    pub decay_rate_minus: f64,
    pub r_squared_plus: f64,
    pub r_squared_minus: f64,
}

/// Projects the field in cell `m` on `u e^{i kappa m}` in the mass inner product.
fn project(op: &StripOperator, u: &InterfaceMode, cell: &[C64], m: i64) -> (C64, f64) {
    let d = op.assemble(C64::new(u.kappa, 0.0));
    let ph = (C64::i() * u.kappa * m as f64).exp();
    let mu = d.m.apply(&u.vector);
    let amp: C64 = mu.iter().zip(cell).map(|(a, b)| a.conj() * b).sum::<C64>() / ph;
    let rest: Vec<C64> = cell.iter().zip(&u.vector).map(|(c, v)| c - amp * ph * v).collect();
    (amp, d.m_inner(&rest, &rest).re.sqrt())
}

/// Mode amplitudes at `probe` cells and the exponential fit of the remainder over `1..=fit_cells`.
///
/// The semicircle nodes amplify the quadrature error by `e^{eta m}`, so the fit should stop
/// before the remainder reaches that floor.
pub fn farfield_along_e(
    g: &GreenEvaluator,
    op: &StripOperator,
    up: &InterfaceMode,
    um: &InterfaceMode,
    y: RawNode,
    probe: i64,
    fit_cells: i64,
) -> Result<FarField, GreenError> {
    let (cell, f) = g.point_source(op, y)?;
    let y0 = (y.0 - cell * op.mesh.n as i64, y.1);
    let uy = |u: &InterfaceMode| op.mesh.bloch_value(&u.vector, C64::new(u.kappa, 0.0), y0).conj();
    let pp = C64::i() / up.slope.abs() * uy(up);
    let pm = C64::i() / um.slope.abs() * uy(um);
    let mut samples = Vec::new();
    let mut fits = Vec::new();
    let mut errs = Vec::new();
    for (u, pred, sign) in [(up, pp, 1i64), (um, pm, -1)] {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut err = f64::NAN;
        for k in 1..g.reach - 1 {
            let m = sign * k;
            let c = f.cell(m).ok_or(GreenError::OutOfRange(m))?;
            let (amp, _) = project(op, u, c, m);
            let exact: Vec<C64> = u.vector.iter().map(|v| pred * (C64::i() * u.kappa * m as f64).exp() * v).collect();
            let rest: Vec<C64> = c.iter().zip(&exact).map(|(a, b)| a - b).collect();
            let d = op.assemble(C64::new(u.kappa, 0.0));
            let rn = d.m_inner(&rest, &rest).re.sqrt();
            samples.push((m, (amp.re, amp.im), rn));
            if k <= fit_cells {
                xs.push(k as f64);
                ys.push(rn.max(1e-300).ln());
            }
            if k == probe {
                err = (amp - pred).norm() / pred.norm();
            }
        }
        let (_, b, r2) = linear_fit(&xs, &ys);
        fits.push((-b, r2));
        errs.push(err);
    }
    Ok(FarField {
        predicted_plus: (pp.re, pp.im),
        predicted_minus: (pm.re, pm.im),
        samples,
        amplitude_error_plus: errs[0],
        amplitude_error_minus: errs[1],
        decay_rate_plus: fits[0].0,
        decay_rate_minus: fits[1].0,
        r_squared_plus: fits[0].1,
        r_squared_minus: fits[1].1,
    })
}

/// `max |G(Fx, Fy) - G(x, y)| / max |G(x, y)|` over the pairs.
pub fn reflection_covariance(g: &GreenEvaluator, op: &StripOperator, pairs: &[(RawNode, RawNode)]) -> Result<f64, GreenError> {
    let f = stripmodes::mesh::reflect_node;
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for &(x, y) in pairs {
        let a = g.kernel(op, x, y)?;
        let b = g.kernel(op, f(x), f(y))?;
        num = num.max((a - b).norm());
        den = den.max(a.norm());
    }
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransverseDecay {
    /// `(|t_x - t_y|, |G|)` along the column through the source.
    pub samples: Vec<(f64, f64)>,
    pub rate: f64,
    pub r_squared: f64,
    /// `|G|` at distance 4 over distance 2.
    pub ratio_4_2: f64,
}

/// Fit of `log |G(x, y)|` against `|t_x - t_y|` in `[1, T - 1]`, source on the interface.
pub fn transverse_decay_check(g: &GreenEvaluator, op: &StripOperator, y: RawNode) -> Result<TransverseDecay, GreenError> {
    let (cell, f) = g.point_source(op, y)?;
    let y0 = (y.0 - cell * op.mesh.n as i64, y.1);
    let per = 3 * op.mesh.n as i64;
    let t = op.mesh.t_cells as i64;
    let mut samples = Vec::new();
    for dt in 1..t {
        // largest value over the two sides and one cell row, so node-level zeros do not dominate
        let mut best: f64 = 0.0;
        for side in [-1i64, 1] {
            for i in 0..op.mesh.n as i64 {
                let v = f.value(op, (y0.0 + i, y0.1 + side * dt * per)).unwrap_or_default();
                best = best.max(v.norm());
            }
        }
        samples.push((dt as f64, best));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.max(1e-300).ln()).collect();
    let (_, b, r2) = linear_fit(&xs, &ys);
    let at = |d: f64| samples.iter().find(|s| s.0 == d).map_or(f64::NAN, |s| s.1);
    let ratio_4_2 = at(4.0) / at(2.0);
    Ok(TransverseDecay { samples, rate: -b, r_squared: r2, ratio_4_2 })
}

/// `max_m |G_m(eta_a) - G_m(eta_b)| / max |G_m(eta_a)|` over `|m| <= 1`.
pub fn contour_independence(
    tab: &InterfaceBandTable,
    lambda: f64,
    eta_a: f64,
    eta_b: f64,
    settings: &ContourSettings,
) -> Result<f64, Box<dyn std::error::Error + Send + Sync>> {
    let build = |eta: f64| -> Result<GreenEvaluator, Box<dyn std::error::Error + Send + Sync>> {
        let c = build_contour(tab, C64::new(lambda, 0.0), &ContourSettings { eta, ..*settings })?;
        Ok(GreenEvaluator::build(&tab.operator, c, 1)?)
    };
    let (a, b) = (build(eta_a)?, build(eta_b)?);
    let mut worst: f64 = 0.0;
    for m in -1..=1 {
        let (x, y) = (a.block(m)?, b.block(m)?);
        worst = worst.max((x - y).norm_max() / x.norm_max());
    }
    Ok(worst)
}

/// Mean of `G_0` over a circle of radius `rho` around real `lambda` against its centre value.
pub fn cauchy_mean_value(
    tab: &InterfaceBandTable,
    lambda: f64,
    rho: f64,
    points: usize,
    settings: &ContourSettings,
) -> Result<f64, Box<dyn std::error::Error + Send + Sync>> {
    let deformed = ContourSettings { real_axis_from: f64::INFINITY, ..*settings };
    let g0 = |l: C64| -> Result<Mat<C64>, Box<dyn std::error::Error + Send + Sync>> {
        let c = build_contour(tab, l, &deformed)?;
        Ok(GreenEvaluator::build(&tab.operator, c, 0)?.block(0)?.clone())
    };
    let centre = g0(C64::new(lambda, 0.0))?;
    let mut mean = Mat::<C64>::zeros(centre.nrows(), centre.ncols());
    for k in 0..points {
        let th = 2.0 * std::f64::consts::PI * k as f64 / points as f64;
        let l = C64::new(lambda, 0.0) + C64::from_polar(rho, th);
        mean += g0(l)?;
    }
    let mean = Mat::from_fn(mean.nrows(), mean.ncols(), |i, j| mean[(i, j)] / points as f64);
    Ok((&mean - &centre).norm_max() / centre.norm_max())
}
