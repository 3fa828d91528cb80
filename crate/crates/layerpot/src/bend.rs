//! Odd and even bent-interface modes from the layer-potential formulation on `Gamma`.

use crate::checks::reflect_about_gamma;
use crate::operators::{
    axpy, double_layer_field, half_identity, matvec, mode_boundary_data, norm, single_layer_field, sub, zero,
    BoundaryOperatorSet, LayerError, ModeBoundaryData,
};
use num_complex::Complex64 as C64;
use outgreen::{CellField, GreenEvaluator};
use serde::{Deserialize, Serialize};
use stripmodes::{
    line_conormals, linear_fit, reflection_between, Coefficient, InterfaceBandTable, InterfaceMode, RawNode, StripOperator,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    /// `u(F_Gamma x) = -u(x)`.
    Odd,
    /// `u(F_Gamma x) = u(x)`.
    Even,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Parity::Odd => -1.0,
            Parity::Even => 1.0,
        }
    }
}

/// Straight-interface data at one `lambda` that both parities share.
#[derive(Debug, Clone)]
pub struct StraightModes {
    pub lambda: f64,
    pub up: InterfaceMode,
    pub um: InterfaceMode,
    pub plus: ModeBoundaryData,
    pub minus: ModeBoundaryData,
    /// `F u_- = beta u_+`.
    pub beta: C64,
}

impl StraightModes {
    pub fn new(tab: &InterfaceBandTable, ops: &BoundaryOperatorSet) -> Result<Self, LayerError> {
        let lambda = ops.lambda.re;
        let (up, um) = tab.mode_pair(lambda)?;
        Ok(Self::from_modes(&tab.operator, ops, up, um))
    }

    pub fn from_modes(op: &StripOperator, ops: &BoundaryOperatorSet, up: InterfaceMode, um: InterfaceMode) -> Self {
        let beta = reflection_between(op, &up, &um).beta();
        let plus = mode_boundary_data(op, ops, &up);
        let minus = mode_boundary_data(op, ops, &um);
        StraightModes { lambda: ops.lambda.re, up, um, plus, minus, beta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BendSettings {
    /// Tikhonov parameter relative to the largest singular value.
    pub relative_tau: f64,
    /// `sigma_min / sigma_max` below which the frequency is flagged exceptional.
    pub threshold: f64,
}

impl Default for BendSettings {
    fn default() -> Self {
        BendSettings { relative_tau: 1e-10, threshold: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BendResiduals {
    /// Bookkeeping of the parity relations between left and right amplitudes.
    pub relations: f64,
    /// Decoupling from the out-going mode, evaluated on the computed densities.
    pub orthogonality: f64,
    /// The row of the Calderon system not used by the solve.
    pub unused_row: f64,
    /// Trace jump across `Gamma` on the window, relative to the propagating trace.
    pub trace_continuity: f64,
    /// Conormal jump across `Gamma` on the window, relative to the propagating conormal.
    pub conormal_continuity: f64,
    /// `| |rL|^2 |v+| + |rR|^2 |v+| - |lL|^2 |v-| - |lR|^2 |v-| |` over the sum.
    pub flux_balance: f64,
    /// Log-linear fit of the evanescent slab norms against the cell distance from the corner.
    pub decay_slope: f64,
    pub decay_r_squared: f64,
}

impl BendResiduals {
    pub fn continuity(&self) -> f64 {
        self.trace_continuity.max(self.conormal_continuity)
    }
}

#[derive(Debug, Clone)]
pub struct BentModeSolution {
    pub lambda: f64,
    pub parity: Parity,
    pub r_l: C64,
    pub l_l: C64,
    pub r_r: C64,
    pub l_r: C64,
    pub beta: C64,
    /// Coefficients `(c_r, c_l)` of the scalar equation `c_r rL + c_l lL = 0`.
    pub scalar: (C64, C64),
    /// Left trace `phi^L` and conormal density `psi^L` of the evanescent part on the window.
    pub phi: Vec<C64>,
    pub psi: Vec<C64>,
    pub sigma_ratio: f64,
    /// Evanescent part on the left half, cells `first..=-1` and `Gamma` as left trace.
    pub evanescent: CellField,
    /// Left trace of the evanescent part on all rows of `Gamma`.
    pub evanescent_trace: Vec<C64>,
    /// Slab norms `(cells from the corner, norm)` of the evanescent part.
    pub slabs: Vec<(f64, f64)>,
    pub residuals: BendResiduals,
}

impl BentModeSolution {
    /// Coefficient of `lL` in the scalar equation for unit data `+g u_-`; equals `i d lambda^E / d kappa` at `kappa_-`.
    pub fn l_coefficient(&self) -> C64 {
        -self.scalar.1
    }

    /// Normalized amplitudes `(lL / rL, rR / rL, lR / rL)`.
    pub fn ratios(&self) -> (C64, C64, C64) {
        (self.l_l / self.r_l, self.r_r / self.r_l, self.l_r / self.r_l)
    }

    /// `u^bend` at a raw node: the left representation for `s <= 0`, the parity image otherwise.
    pub fn value(&self, op: &StripOperator, modes: &StraightModes, p: RawNode) -> C64 {
        if p.0 > 0 {
            return self.parity.sign() * self.left_value(op, modes, reflect_about_gamma(p));
        }
        self.left_value(op, modes, p)
    }

    fn left_value(&self, op: &StripOperator, modes: &StraightModes, p: RawNode) -> C64 {
        let mesh = &op.mesh;
        let prop = self.r_l * mesh.bloch_value(&modes.up.vector, C64::new(modes.up.kappa, 0.0), p)
            + self.l_l * mesh.bloch_value(&modes.um.vector, C64::new(modes.um.kappa, 0.0), p);
        let w = if p.0 == 0 {
            mesh.row_index(p.1).map_or(zero(), |r| self.evanescent_trace[r])
        } else {
            self.evanescent.value(op, p).unwrap_or_else(zero)
        };
        prop + w
    }
}

/// Solves the odd or even bent-interface system at the frequency of `ops`.
///
/// Odd: `phi = -rL g u_+ - lL g u_-`, `psi = S^-1 (1/2 + K) phi`. Even: `psi = -rL d u_+ - lL d u_-`,
/// `phi = N^-1 (-1/2 + K*) psi`. The decoupling `<psi, g u_-> - <phi, d u_-> = 0` fixes `(rL, lL)`
/// up to scale; the right amplitudes follow from the parity relations with `beta`.
pub fn solve_bent_mode(
    g: &GreenEvaluator,
    op: &StripOperator,
    ops: &BoundaryOperatorSet,
    modes: &StraightModes,
    parity: Parity,
    settings: &BendSettings,
) -> Result<BentModeSolution, LayerError> {
    let one = C64::new(1.0, 0.0);
    let half = half_identity(ops.len());
    let (p, m) = (&modes.plus, &modes.minus);
    let (inv, name, map) = match parity {
        Parity::Odd => (ops.s_inverse(settings.relative_tau)?, "S", &half + &ops.k),
        Parity::Even => (ops.n_inverse(settings.relative_tau)?, "N", &ops.kstar - &half),
    };
    let sigma_ratio = inv.ratio();
    if sigma_ratio < settings.threshold {
        return Err(LayerError::ExceptionalFrequency { lambda: modes.lambda, operator: name, ratio: sigma_ratio });
    }
    // boundary data (phi, psi) generated by a unit amplitude of one straight mode
    let data = |d: &ModeBoundaryData| -> (Vec<C64>, Vec<C64>) {
        match parity {
            Parity::Odd => {
                let phi: Vec<C64> = d.trace.iter().map(|v| -v).collect();
                let psi = inv.solve(&matvec(&map, &phi));
                (phi, psi)
            }
            Parity::Even => {
                let psi: Vec<C64> = d.density.iter().map(|v| -v).collect();
                let phi = inv.solve(&matvec(&map, &psi));
                (phi, psi)
            }
        }
    };
    let decoupling = |phi: &[C64], psi: &[C64]| ops.pairing(psi, &m.trace) - ops.pairing(phi, &m.density);
    let (phi_p, psi_p) = data(p);
    let (phi_m, psi_m) = data(m);
    let c_r = decoupling(&phi_p, &psi_p);
    let c_l = decoupling(&phi_m, &psi_m);
    let scale = norm(&m.trace) * norm(&m.density) + norm(&p.trace) * norm(&p.density);
    if c_r.norm().max(c_l.norm()) < 1e-12 * scale {
        return Err(LayerError::DegenerateSystem);
    }
    let len = (c_r.norm_sqr() + c_l.norm_sqr()).sqrt();
    let (mut r_l, mut l_l) = (c_l / len, -c_r / len);
    // fix the global phase so the larger amplitude is real positive
    let pivot = if r_l.norm() >= l_l.norm() { r_l } else { l_l };
    let ph = pivot.conj() / pivot.norm();
    r_l *= ph;
    l_l *= ph;
    let phi = axpy(r_l, &phi_p, l_l, &phi_m);
    let psi = axpy(r_l, &psi_p, l_l, &psi_m);
    let beta = modes.beta;
    let sign = parity.sign();
    // odd: rL = -beta lR, lL = -rR / beta; even with + signs
    let l_r = sign * r_l / beta;
    let r_r = sign * beta * l_l;
    let relations = (r_l - sign * beta * l_r).norm() + (l_l - sign * r_r / beta).norm();

    let orthogonality = decoupling(&phi, &psi).norm()
        / (norm(&psi) * norm(&m.trace) + norm(&phi) * norm(&m.density)).max(1e-300);
    let unused_row = match parity {
        Parity::Odd => {
            let lhs = axpy(-one, &matvec(&ops.n, &phi), one, &matvec(&(&half + &ops.kstar), &psi));
            norm(&sub(&lhs, &psi)) / norm(&psi).max(1e-300)
        }
        Parity::Even => {
            let lhs = axpy(one, &matvec(&(&half - &ops.k), &phi), one, &matvec(&ops.s, &psi));
            norm(&sub(&lhs, &phi)) / norm(&phi).max(1e-300)
        }
    };

    // evanescent part on the left: -D[phi] + S[psi]
    let rows = op.mesh.rows();
    let phi_full = ops.extend(&phi, rows);
    let dl = double_layer_field(g, op, &phi_full)?;
    let sl = single_layer_field(g, op, &ops.load(&psi))?;
    let evanescent = dl.combine(-one, &sl, one);
    let gamma_idx = &g.reduction.gamma;
    let cell0 = evanescent.cell(0).unwrap();
    // left trace of -D[phi] is -(D_Gamma - phi)
    let evanescent_trace: Vec<C64> = (0..rows).map(|r| cell0[gamma_idx[r]] + phi_full[r]).collect();

    let v_plus = modes.up.slope.abs();
    let v_minus = modes.um.slope.abs();
    let out = (r_l.norm_sqr() + r_r.norm_sqr()) * v_plus;
    let inc = (l_l.norm_sqr() + l_r.norm_sqr()) * v_minus;
    let flux_balance = (out - inc).abs() / (out + inc);

    let mut sol = BentModeSolution {
        lambda: modes.lambda,
        parity,
        r_l,
        l_l,
        r_r,
        l_r,
        beta,
        scalar: (c_r, c_l),
        phi,
        psi,
        sigma_ratio,
        evanescent,
        evanescent_trace,
        slabs: Vec::new(),
        residuals: BendResiduals {
            relations,
            orthogonality,
            unused_row,
            trace_continuity: 0.0,
            conormal_continuity: 0.0,
            flux_balance,
            decay_slope: 0.0,
            decay_r_squared: 0.0,
        },
    };
    continuity(op, ops, modes, &mut sol);
    decay(&mut sol);
    Ok(sol)
}

/// Trace and conormal jumps of the reconstructed field across `Gamma`, in the bent medium.
fn continuity(op: &StripOperator, ops: &BoundaryOperatorSet, modes: &StraightModes, sol: &mut BentModeSolution) {
    let mesh = &op.mesh;
    let sign = sol.parity.sign();
    let left = |p: RawNode| sol.left_value(op, modes, p);
    // right side values: the parity image, whose trace on Gamma is sign times the left trace
    let right = |p: RawNode| sign * sol.left_value(op, modes, reflect_about_gamma(p));
    let coef = Coefficient::Bend.closure(&op.medium);
    let lambda = C64::new(sol.lambda, 0.0);
    let (_, dminus) = line_conormals(mesh, &coef, &left, lambda, 0);
    let (dplus, _) = line_conormals(mesh, &coef, &right, lambda, 0);
    let gm: Vec<C64> = (0..mesh.rows()).map(|r| left((0, mesh.row_of(r)))).collect();
    let gp: Vec<C64> = gm.iter().map(|v| sign * v).collect();
    let tscale = norm(&ops.window(&modes.plus.full_trace)) * sol.r_l.norm()
        + norm(&ops.window(&modes.minus.full_trace)) * sol.l_l.norm();
    let cscale = norm(&ops.window(&modes.plus.full_conormal)) * sol.r_l.norm()
        + norm(&ops.window(&modes.minus.full_conormal)) * sol.l_l.norm();
    sol.residuals.trace_continuity = norm(&ops.window(&sub(&gm, &gp))) / tscale.max(1e-300);
    sol.residuals.conormal_continuity = norm(&ops.window(&sub(&dminus, &dplus))) / cscale.max(1e-300);
}

/// Slab norms of the evanescent part over the left cells and their log-linear fit.
fn decay(sol: &mut BentModeSolution) {
    let ev = &sol.evanescent;
    let slabs: Vec<(f64, f64)> =
        (ev.first..0).rev().map(|m| ((-m) as f64, norm(ev.cell(m).unwrap()))).filter(|s| s.1 > 0.0).collect();
    if slabs.len() >= 2 {
        let xs: Vec<f64> = slabs.iter().map(|s| s.0).collect();
        let ys: Vec<f64> = slabs.iter().map(|s| s.1.ln()).collect();
        let (_, b, r2) = linear_fit(&xs, &ys);
        sol.residuals.decay_slope = b;
        sol.residuals.decay_r_squared = r2;
    }
    sol.slabs = slabs;
}
