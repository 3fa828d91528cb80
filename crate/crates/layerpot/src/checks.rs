//! Jump, Calderon, rotation and projection identities of the assembled operators.

use crate::operators::{
    axpy, double_layer_field, half_identity, matvec, norm, single_layer_field, sub, zero, BoundaryOperatorSet, LayerError,
    ModeBoundaryData,
};
use faer::Mat;
use num_complex::Complex64 as C64;
use outgreen::{CellField, GreenEvaluator};
use serde::{Deserialize, Serialize};
use stripmodes::{line_conormals, Coefficient, RawNode, StripOperator};

/// Smooth bump in `t`, supported on `|t - centre| < width`.
pub fn bump_density(ops: &BoundaryOperatorSet, centre: f64, width: f64) -> Vec<C64> {
    ops.t
        .iter()
        .map(|&t| {
            let q = (t - centre) / width;
            let v = if q.abs() < 1.0 { (1.0 - 1.0 / (1.0 - q * q)).exp() } else { 0.0 };
            C64::new(v, 0.3 * v * q)
        })
        .collect()
}

/// Right map `F_Gamma = F R` of raw nodes: `(i, j) -> (-i, 3i + j)`; the identity on `Gamma`.
pub fn reflect_about_gamma(p: RawNode) -> RawNode {
    (-p.0, 3 * p.0 + p.1)
}

fn field_fn<'a>(op: &'a StripOperator, f: &'a CellField) -> impl Fn(RawNode) -> C64 + 'a {
    move |p| f.value(op, p).unwrap_or_else(zero)
}

/// One-sided conormal functionals `(right, left)` on `Gamma` of a Green field.
fn conormals(op: &StripOperator, coef: Coefficient, field: &dyn Fn(RawNode) -> C64, lambda: C64) -> (Vec<C64>, Vec<C64>) {
    let c = coef.closure(&op.medium);
    line_conormals(&op.mesh, &c, field, lambda, 0)
}

fn rel(a: &[C64], b: &[C64]) -> f64 {
    norm(&sub(a, b)) / norm(b).max(1e-300)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleLayerJump {
    /// `|| (d+ - d-) S[phi] + phi || / || phi ||`.
    pub jump: f64,
    /// Schur-formula `K*` against the mean of the measured one-sided conormals.
    pub kstar_consistency: f64,
    /// Schur-formula `S` against the measured trace.
    pub s_consistency: f64,
}

/// Measures the conormal jump of the single layer of a bump density.
pub fn single_layer_jump(g: &GreenEvaluator, op: &StripOperator, ops: &BoundaryOperatorSet) -> Result<SingleLayerJump, LayerError> {
    let phi = bump_density(ops, 0.0, 0.5 * ops.half_width.max(1.0));
    let load = ops.load(&phi);
    let u = single_layer_field(g, op, &load)?;
    let f = field_fn(op, &u);
    let (right, left) = conormals(op, op.coefficient, &f, ops.lambda);
    let dr = ops.density(&right);
    let dl = ops.density(&left);
    let jump = norm(&axpy(C64::new(1.0, 0.0), &sub(&dr, &dl), C64::new(1.0, 0.0), &phi)) / norm(&phi);
    let mean = axpy(C64::new(0.5, 0.0), &dr, C64::new(0.5, 0.0), &dl);
    let kstar_consistency = rel(&mean, &matvec(&ops.kstar, &phi));
    let trace: Vec<C64> = ops.rows.iter().map(|&r| u.cell(0).unwrap()[g.reduction.gamma[r]]).collect();
    let s_consistency = rel(&trace, &matvec(&ops.s, &phi));
    Ok(SingleLayerJump { jump, kstar_consistency, s_consistency })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleLayerJump {
    /// `|| (g+ - g-) D[phi] - phi || / || phi ||`, with the left trace recovered from the
    /// equations of the column left of `Gamma`.
    pub jump: f64,
    /// Mean of the two traces against `K phi`.
    pub k_consistency: f64,
    /// Right conormal against `N phi`.
    pub n_consistency: f64,
    /// `|| d+ D - d- D || / || d+ D ||`.
    pub conormal_jump: f64,
}

pub fn double_layer_jump(g: &GreenEvaluator, op: &StripOperator, ops: &BoundaryOperatorSet) -> Result<DoubleLayerJump, LayerError> {
    let r = &g.reduction;
    let mesh = &op.mesh;
    let rows = mesh.rows();
    let phi = bump_density(ops, 0.0, 0.5 * ops.half_width.max(1.0));
    let phi_full = ops.extend(&phi, rows);
    let w = double_layer_field(g, op, &phi_full)?;
    let plus: Vec<C64> = r.gamma.iter().map(|&i| w.cell(0).unwrap()[i]).collect();

    // left trace v solves the column n-1 equations of cell -1 with w elsewhere
    let n = mesh.n;
    let lambda = ops.lambda;
    let mut b = Mat::<C64>::zeros(rows, rows);
    let mut rhs = vec![zero(); rows];
    let prev = w.cell(-1).ok_or(LayerError::Green(outgreen::GreenError::OutOfRange(-1)))?;
    let here = w.cell(0).unwrap();
    for c in &op.couplings {
        if c.row % n != n - 1 {
            continue;
        }
        let eq = c.row / n;
        let a = C64::new(c.k, 0.0) - lambda * c.m;
        if c.dcell == 1 && c.col % n == 0 {
            b[(eq, c.col / n)] += a;
        } else {
            let v = match c.dcell {
                0 => prev[c.col],
                1 => here[c.col],
                _ => w.cell(-2).ok_or(LayerError::Green(outgreen::GreenError::OutOfRange(-2)))?[c.col],
            };
            rhs[eq] -= a * v;
        }
    }
    // the top node of Gamma has no left neighbour in that column, so the first equation is
    // empty and the last unknown is free; it is taken from the definition instead
    let m = rows - 1;
    let x = {
        use faer::linalg::solvers::Solve;
        let bb = Mat::from_fn(m, m, |i, j| b[(i + 1, j)]);
        let rhs_m = Mat::from_fn(m, 1, |i, _| rhs[i + 1]);
        bb.partial_piv_lu().solve(&rhs_m)
    };
    let mut minus: Vec<C64> = (0..m).map(|i| x[(i, 0)]).collect();
    minus.push(plus[m] - phi_full[m]);
    let jump_full = sub(&plus, &minus);
    let jump = rel(&ops.window(&jump_full), &phi);
    let mean = ops.window(&axpy(C64::new(0.5, 0.0), &plus, C64::new(0.5, 0.0), &minus));
    let k_consistency = rel(&mean, &matvec(&ops.k, &phi));

    let right_field = field_fn(op, &w);
    let left_field = |p: RawNode| {
        if p.0 == 0 {
            mesh.row_index(p.1).map_or(zero(), |rr| minus[rr])
        } else {
            right_field(p)
        }
    };
    let (dplus, _) = conormals(op, op.coefficient, &right_field, lambda);
    let (_, dminus) = conormals(op, op.coefficient, &left_field, lambda);
    let n_consistency = rel(&ops.density(&dplus), &matvec(&ops.n, &phi));
    let conormal_jump = rel(&ops.window(&dminus), &ops.window(&dplus));
    Ok(DoubleLayerJump { jump, k_consistency, n_consistency, conormal_jump })
}

pub(crate) fn spectral_norm(a: &Mat<C64>) -> f64 {
    a.singular_values().map(|s| s.into_iter().fold(0.0, f64::max)).unwrap_or(f64::NAN)
}

/// `||S K* - K S|| / (||S|| ||K*||)` in the spectral norm.
pub fn calderon_commutator(ops: &BoundaryOperatorSet) -> f64 {
    let c = &(&ops.s * &ops.kstar) - &(&ops.k * &ops.s);
    spectral_norm(&c) / (spectral_norm(&ops.s) * spectral_norm(&ops.kstar))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatedRelations {
    /// `|| S_rot - S || / || S ||` on the sampled columns, `S_rot` from `G(R x, R y)`.
    pub single_layer: f64,
    /// `|| K*_rot + K* || / || K* ||`, from conormals in the rotated medium.
    pub kstar: f64,
    pub columns: usize,
}

/// Cells of reach the rotated check needs for samples within `|t| <= half_width`.
pub fn rotated_reach(op: &StripOperator, half_width: f64) -> i64 {
    let j = (half_width * 3.0 * op.mesh.n as f64).floor() as i64 + 1;
    2 * (j + op.mesh.n as i64 - 1) / op.mesh.n as i64 + 3
}

/// Operators of the rotated medium `a^E(R x)` on `Gamma` against those of `a^E`.
///
/// The rotated single layer is evaluated by its definition `G(R x, R y)`; the rotated conormal
/// is taken of the rotated single-layer field, pulled back through the right map of `Gamma`,
/// with the rotated coefficient. Sample columns and rows lie within `|t| <= half_width`.
pub fn rotated_relations(
    g: &GreenEvaluator,
    op: &StripOperator,
    ops: &BoundaryOperatorSet,
    half_width: f64,
    columns: usize,
) -> Result<RotatedRelations, LayerError> {
    let mesh = &op.mesh;
    let per = 3.0 * mesh.n as f64;
    let inner: Vec<usize> = (0..ops.len()).filter(|&k| ops.t[k].abs() <= half_width).collect();
    let step = (inner.len() / columns.max(1)).max(1);
    let picks: Vec<usize> = inner.iter().copied().step_by(step).take(columns).collect();
    let rotate = stripmodes::mesh::rotate_node;
    let (mut ds, mut ns, mut dk, mut nk) = (0.0, 0.0, 0.0, 0.0);
    for &col in &picks {
        let mut e = vec![zero(); ops.len()];
        e[col] = C64::new(1.0, 0.0);
        let load = ops.load(&e);
        // rotated single layer: sum_y G(R x, R y) load(y)
        let mut srot = vec![zero(); ops.len()];
        for (yr, &ly) in load.iter().enumerate() {
            if ly == zero() {
                continue;
            }
            let y = rotate((0, mesh.row_of(yr)));
            let (cell, f) = g.point_source(op, y)?;
            let n = mesh.n as i64;
            for &k in &inner {
                let x = rotate((0, (ops.t[k] * per).round() as i64));
                let v = f.value(op, (x.0 - cell * n, x.1)).ok_or(LayerError::Green(outgreen::GreenError::OutOfRange(cell)))?;
                srot[k] += v * ly;
            }
        }
        for &k in &inner {
            ds += (srot[k] - ops.s[(k, col)]).norm_sqr();
            ns += ops.s[(k, col)].norm_sqr();
        }
        // rotated conormal of the pulled-back field, right side
        let u = single_layer_field(g, op, &load)?;
        let pulled = |p: RawNode| u.value(op, reflect_about_gamma(p)).unwrap_or_else(zero);
        let (right, _) = conormals(op, Coefficient::RotatedInterface, &pulled, ops.lambda);
        let d = ops.density(&right);
        for &k in &inner {
            let kr = d[k] + 0.5 * e[k];
            dk += (kr + ops.kstar[(k, col)]).norm_sqr();
            nk += ops.kstar[(k, col)].norm_sqr();
        }
    }
    Ok(RotatedRelations { single_layer: (ds / ns).sqrt(), kstar: (dk / nk).sqrt(), columns: picks.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    /// `|| (1/2 - K) g u_- + S d u_- - g u_- || / || g u_- ||`.
    pub minus_trace: f64,
    /// `|| -N g u_- + (1/2 + K*) d u_- - d u_- || / || d u_- ||`.
    pub minus_conormal: f64,
    /// `|| (1/2 + K) g u_+ - S d u_+ - g u_+ || / || g u_+ ||`.
    pub plus_trace: f64,
    /// `|| N g u_+ + (1/2 - K*) d u_+ - d u_+ || / || d u_+ ||`.
    pub plus_conormal: f64,
}

impl ProjectionReport {
    pub fn worst(&self) -> f64 {
        self.minus_trace.max(self.minus_conormal).max(self.plus_trace).max(self.plus_conormal)
    }
}

fn ratio(num: &[C64], den: &[C64]) -> f64 {
    let d = norm(den);
    if d == 0.0 {
        if norm(num) == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        norm(num) / d
    }
}

/// Residuals of the Calderon projector on the data of the left- and right-going modes.
pub fn projection_identity_check(ops: &BoundaryOperatorSet, plus: &ModeBoundaryData, minus: &ModeBoundaryData) -> ProjectionReport {
    let n = ops.len();
    let half = half_identity(n);
    let one = C64::new(1.0, 0.0);
    let hk_minus = &half - &ops.k;
    let hk_plus = &half + &ops.k;
    let hks_plus = &half + &ops.kstar;
    let hks_minus = &half - &ops.kstar;
    let (g, d) = (&minus.trace, &minus.density);
    let r1 = sub(&axpy(one, &matvec(&hk_minus, g), one, &matvec(&ops.s, d)), g);
    let r2 = sub(&axpy(-one, &matvec(&ops.n, g), one, &matvec(&hks_plus, d)), d);
    let (g, d) = (&plus.trace, &plus.density);
    let r3 = sub(&axpy(one, &matvec(&hk_plus, g), -one, &matvec(&ops.s, d)), g);
    let r4 = sub(&axpy(one, &matvec(&ops.n, g), one, &matvec(&hks_minus, d)), d);
    ProjectionReport {
        minus_trace: ratio(&r1, &minus.trace),
        minus_conormal: ratio(&r2, &minus.density),
        plus_trace: ratio(&r3, &plus.trace),
        plus_conormal: ratio(&r4, &plus.density),
    }
}

/// Outcome of the Dirichlet-to-Neumann identity for the left-going mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtnReport {
    pub value: C64,
    /// `i d lambda^E / d kappa` at `kappa_-`.
    pub expected: C64,
    pub relative_error: f64,
    /// `|| S^-1 (1/2 + K) g u_- - d u_- || / || d u_- ||`.
    pub intermediate: f64,
    /// `|Re value| / |value|`.
    pub real_fraction: f64,
    pub sigma_ratio: f64,
}

/// `<S^-1 (1/2 + K) g u_-, g u_->  -  <g u_-, d u_->`, compared with the group velocity.
pub fn dtn_group_velocity(
    ops: &BoundaryOperatorSet,
    minus: &ModeBoundaryData,
    relative_tau: f64,
    threshold: f64,
) -> Result<DtnReport, LayerError> {
    let inv = ops.s_inverse(relative_tau)?;
    let sigma_ratio = inv.ratio();
    if sigma_ratio < threshold {
        return Err(LayerError::NearSingularS { lambda: ops.lambda.re, ratio: sigma_ratio });
    }
    let hk = &half_identity(ops.len()) + &ops.k;
    let dtn = inv.solve(&matvec(&hk, &minus.trace));
    let value = ops.pairing(&dtn, &minus.trace) - ops.pairing(&minus.trace, &minus.density);
    let expected = C64::new(0.0, minus.slope);
    Ok(DtnReport {
        value,
        expected,
        relative_error: (value - expected).norm() / expected.norm(),
        intermediate: rel(&dtn, &minus.density),
        real_fraction: value.re.abs() / value.norm(),
        sigma_ratio,
    })
}
