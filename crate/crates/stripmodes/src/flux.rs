//! Traces, conormal functionals and the energy-flux form on the column lines `Gamma_n`.

use crate::assembly::{dot, line_conormals, StripOperator};
use crate::band::{BandTableError, InterfaceBandTable, InterfaceMode};
use crate::coefficient::Coefficient;
use crate::mesh::{reflect_node, rotate_node, RawNode, StripMesh};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceSide {
    Left,
    Right,
    TwoSided,
}

/// Values and weak conormal functional of a field on a column line, ordered by row.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub values: Vec<C64>,
    pub conormal: Vec<C64>,
    pub side: TraceSide,
    /// `max |right - left|` of the two one-sided conormals.
    pub mismatch: f64,
}

/// Trace of a raw-node field on column line `col`, for a solution with coefficient `coef`.
pub fn boundary_trace(
    op: &StripOperator,
    coef: Coefficient,
    field: &dyn Fn(RawNode) -> C64,
    lambda: f64,
    col: i64,
    side: TraceSide,
) -> BoundaryTrace {
    let mesh = &op.mesh;
    let c = coef.closure(&op.medium);
    let (right, left) = line_conormals(mesh, &c, field, C64::new(lambda, 0.0), col);
    let mismatch = right.iter().zip(&left).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let conormal = match side {
        TraceSide::Right => right,
        TraceSide::Left => left,
        TraceSide::TwoSided => right.iter().zip(&left).map(|(a, b)| 0.5 * (a + b)).collect(),
    };
    let values = (0..mesh.rows()).map(|r| field((col, mesh.row_of(r)))).collect();
    BoundaryTrace { values, conormal, side, mismatch }
}

/// Trace of an interface mode on `Gamma_col`.
pub fn mode_trace(op: &StripOperator, m: &InterfaceMode, col: i64) -> BoundaryTrace {
    let f = |p: RawNode| op.mesh.bloch_value(&m.vector, C64::new(m.kappa, 0.0), p);
    boundary_trace(op, op.coefficient, &f, m.lambda, col, TraceSide::TwoSided)
}

/// `sum (d u) conj(v) - u conj(d v)` over the line.
pub fn flux_form(u: &BoundaryTrace, v: &BoundaryTrace) -> C64 {
    dot(&v.values, &u.conormal) - dot(&v.conormal, &u.values)
}

/// Energy flux of two modes through `Gamma_col`.
pub fn energy_flux(op: &StripOperator, u: &InterfaceMode, v: &InterfaceMode, col: i64) -> C64 {
    flux_form(&mode_trace(op, u, col), &mode_trace(op, v, col))
}

/// Outcome of comparing `u_-` reflected about the `t` axis with `u_+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionReport {
    pub beta_re: f64,
    pub beta_im: f64,
    /// `|| F u_- - beta u_+ ||_M`, with unit-norm modes.
    pub residual: f64,
    /// `|| F F u_- - u_- ||` on the nodes.
    pub involution: f64,
    /// Relative residuals of the four trace identities on `Gamma`.
    pub trace_minus: f64,
    pub conormal_minus: f64,
    pub trace_plus: f64,
    pub conormal_plus: f64,
}

impl ReflectionReport {
    pub fn beta(&self) -> C64 {
        C64::new(self.beta_re, self.beta_im)
    }
}

fn rel(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Pulls a Bloch mode back through a node map, giving cell-0 values of `u(map p)`.
pub fn pullback(mesh: &StripMesh, m: &InterfaceMode, map: fn(RawNode) -> RawNode) -> Vec<C64> {
    (0..mesh.len()).map(|i| mesh.bloch_value(&m.vector, C64::new(m.kappa, 0.0), map(mesh.raw(i)))).collect()
}

/// `beta` with `F u_- = beta u_+`, and the four rotated trace identities on `Gamma`.
pub fn reflection_relation(tab: &InterfaceBandTable, lambda: f64) -> Result<ReflectionReport, BandTableError> {
    let (up, um) = tab.mode_pair(lambda)?;
    Ok(reflection_between(&tab.operator, &up, &um))
}

pub fn reflection_between(op: &StripOperator, up: &InterfaceMode, um: &InterfaceMode) -> ReflectionReport {
    let mesh = &op.mesh;
    let d = op.assemble(C64::new(up.kappa, 0.0));
    let fum = pullback(mesh, um, reflect_node);
    let mu = d.m.apply(&up.vector);
    let beta = dot(&mu, &fum) / dot(&mu, &up.vector);
    let diff: Vec<C64> = fum.iter().zip(&up.vector).map(|(a, b)| a - beta * b).collect();
    let residual = d.m_inner(&diff, &diff).re.sqrt();

    let back = InterfaceMode { kappa: up.kappa, lambda: up.lambda, slope: up.slope, vector: fum };
    let ffum = pullback(mesh, &back, reflect_node);
    let involution = ffum.iter().zip(&um.vector).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);

    let rotated = |m: &InterfaceMode| {
        let f = |p: RawNode| mesh.bloch_value(&m.vector, C64::new(m.kappa, 0.0), rotate_node(p));
        boundary_trace(op, Coefficient::RotatedInterface, &f, m.lambda, 0, TraceSide::TwoSided)
    };
    let tp = mode_trace(op, up, 0);
    let tm = mode_trace(op, um, 0);
    let rm = rotated(um);
    let rp = rotated(up);
    let scale = |v: &[C64], s: C64| v.iter().map(|x| s * x).collect::<Vec<_>>();
    let binv = 1.0 / beta;
    ReflectionReport {
        beta_re: beta.re,
        beta_im: beta.im,
        residual,
        involution,
        trace_minus: rel(&rm.values, &scale(&tp.values, beta)),
        conormal_minus: rel(&rm.conormal, &scale(&tp.conormal, -beta)),
        trace_plus: rel(&rp.values, &scale(&tm.values, binv)),
        conormal_plus: rel(&rp.conormal, &scale(&tm.conormal, -binv)),
    }
}

/// Exponential fit of slab norms away from the interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `(|t| slab centre, L2 norm of the slab)`, both sides of `E`.
    pub slabs: Vec<(f64, f64)>,
    /// Decay rate per unit `t`; positive means decay.
    pub rate: f64,
    pub r_squared: f64,
}

/// Least-squares line `y = a + b x`, returning `(a, b, R^2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let b = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (my - b * mx, b, r2)
}

/// Slab norms over unit `t` intervals and the log-linear fit over `|t| > T/2`.
pub fn transverse_decay(op: &StripOperator, m: &InterfaceMode) -> DecayFit {
    let mesh = &op.mesh;
    let d = op.assemble(C64::new(m.kappa, 0.0));
    let mu = d.m.apply(&m.vector);
    let per = 3 * mesh.n as i64;
    let t = mesh.t_cells as i64;
    let mut acc = vec![0.0; 2 * t as usize];
    for i in 0..mesh.len() {
        let j = mesh.raw(i).1;
        let slab = (j.div_euclid(per) + t) as usize;
        acc[slab] += (m.vector[i].conj() * mu[i]).re;
    }
    let slabs: Vec<(f64, f64)> =
        acc.iter().enumerate().map(|(k, &v)| ((k as f64 - t as f64 + 0.5).abs(), v.max(0.0).sqrt())).collect();
    let far: Vec<&(f64, f64)> = slabs.iter().filter(|s| s.0 > 0.5 * t as f64 && s.1 > 0.0).collect();
    let xs: Vec<f64> = far.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = far.iter().map(|s| s.1.ln()).collect();
    let (_, b, r2) = linear_fit(&xs, &ys);
    DecayFit { slabs, rate: -b, r_squared: r2 }
}
