//! Dirac point at `K`: degeneracy, cone slope, rotation eigenvalues and the coupling `t*`.

use crate::planewave::{inner, inversion_conjugation, symmetry_action, BandError, BlochBandResult, DeltaSign, PlaneWaveSolver};
use faer::c64;
use lattice::{SymmetryOp, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub fn tau() -> c64 {
    c64::from_polar(1.0, 2.0 * PI / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracSettings {
    /// Relative degeneracy tolerance, scaled by `max(1, |lambda*|)`.
    pub degeneracy_tol: f64,
    pub c0: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub q_samples: usize,
}

impl Default for DiracSettings {
    fn default() -> Self {
        DiracSettings { degeneracy_tol: 1e-8, c0: 0.9, q_min: 1e-3, q_max: 5e-2, q_samples: 8 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeFit {
    pub direction: [f64; 2],
    pub slope: f64,
    pub curvature: f64,
    /// `|curvature| q_max / slope`.
    pub relative_correction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiracPointData {
    pub lambda_star: f64,
    pub split: f64,
    pub alpha_star: f64,
    pub cones: Vec<ConeFit>,
    pub tau1: [f64; 2],
    pub tau2: [f64; 2],
    /// `min_phase |u2 - e^{i theta} V C u1|`.
    pub pt_residual: f64,
    pub t_star: [f64; 2],
    pub gap: (f64, f64),
    #[serde(skip)]
    pub u1: Vec<c64>,
    #[serde(skip)]
    pub u2: Vec<c64>,
    #[serde(skip)]
    pub at_k: Option<BlochBandResult>,
}

impl DiracPointData {
    pub fn t_star(&self) -> f64 {
        self.t_star[0]
    }

    pub fn tau_pair(&self) -> (c64, c64) {
        (c64::new(self.tau1[0], self.tau1[1]), c64::new(self.tau2[0], self.tau2[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub diag_plus: [f64; 2],
    pub diag_minus: [f64; 2],
    pub offdiag: [f64; 2],
}

fn pair(z: c64) -> [f64; 2] {
    [z.re, z.im]
}

/// Eigen-decomposition of a 2x2 complex matrix `[[p, q], [r, s]]`.
fn eig2(p: c64, q: c64, r: c64, s: c64) -> [(c64, [c64; 2]); 2] {
    let tr = p + s;
    let det = p * s - q * r;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let l = [tr * 0.5 + disc, tr * 0.5 - disc];
    l.map(|lam| {
        // (p - lam) x + q y = 0
        let v = if q.norm() + (p - lam).norm() > (r.norm() + (s - lam).norm()) {
            [q, lam - p]
        } else {
            [lam - s, r]
        };
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        (lam, [v[0] / n, v[1] / n])
    })
}

/// Rotation eigenvalue `<u, R u>` of a (non-degenerate) band at `K`.
pub fn rotation_eigenvalue(res: &BlochBandResult, solver: &PlaneWaveSolver, band: usize) -> Option<c64> {
    let u = &res.eigenvectors[band];
    let ru = symmetry_action(res, &solver.medium.geometry, &SymmetryOp::rotation(), u)?;
    Some(inner(u, &ru))
}

pub fn detect_dirac(solver: &PlaneWaveSolver, settings: &DiracSettings) -> Result<DiracPointData, BandError> {
    let geom = &solver.medium.geometry;
    let k = geom.k;
    let res = solver.solve(k, 3, DeltaSign::Zero)?;
    let (l1, l2) = (res.eigenvalues[0], res.eigenvalues[1]);
    let lambda_star = 0.5 * (l1 + l2);
    let tol = settings.degeneracy_tol * lambda_star.abs().max(1.0);
    let split = (l2 - l1).abs();
    if split > tol {
        return Err(BandError::NoDiracPoint { gap: split, tol });
    }

    // diagonalise R inside the degenerate pair
    let rot = SymmetryOp::rotation();
    let (v1, v2) = (&res.eigenvectors[0], &res.eigenvectors[1]);
    let rv1 = symmetry_action(&res, geom, &rot, v1).expect("K is rotation-fixed");
    let rv2 = symmetry_action(&res, geom, &rot, v2).expect("K is rotation-fixed");
    let m = [[inner(v1, &rv1), inner(v1, &rv2)], [inner(v2, &rv1), inner(v2, &rv2)]];
    let eig = eig2(m[0][0], m[0][1], m[1][0], m[1][1]);
    let (first, second) = if (eig[0].0 - tau()).norm() <= (eig[1].0 - tau()).norm() { (0, 1) } else { (1, 0) };
    let combine = |w: [c64; 2]| -> Vec<c64> { v1.iter().zip(v2).map(|(a, b)| a * w[0] + b * w[1]).collect() };
    let mut u1 = combine(eig[first].1);
    // fix the phase of u1 by its largest coefficient
    let big = u1.iter().copied().fold(c64::new(0.0, 0.0), |acc, z| if z.norm() > acc.norm() { z } else { acc });
    let ph = big.conj() / big.norm();
    for z in u1.iter_mut() {
        *z *= ph;
    }
    let u2_raw = combine(eig[second].1);
    let vc = inversion_conjugation(&u1);
    let ov = inner(&vc, &u2_raw);
    let pt_residual = (2.0 - 2.0 * ov.norm()).max(0.0).sqrt();
    let u2 = vc;
    let (tau1, tau2) = (eig[first].0, eig[second].0);

    let t_star = solver.perturbation_form(&res.basis, &u1, &u1);
    let cones = fit_cones(solver, lambda_star, settings)?;
    let alpha_star = cones.iter().map(|c| c.slope).sum::<f64>() / cones.len() as f64;
    let half = settings.c0 * (t_star.re * solver.medium.params.delta).abs();
    Ok(DiracPointData {
        lambda_star,
        split,
        alpha_star,
        cones,
        tau1: pair(tau1),
        tau2: pair(tau2),
        pt_residual,
        t_star: pair(t_star),
        gap: (lambda_star - half, lambda_star + half),
        u1,
        u2,
        at_k: Some(res),
    })
}

fn fit_cones(solver: &PlaneWaveSolver, lambda_star: f64, s: &DiracSettings) -> Result<Vec<ConeFit>, BandError> {
    let k = solver.medium.geometry.k;
    let rot = SymmetryOp::rotation();
    let d0 = Vec2::new(1.0, 0.0);
    let dirs = [d0, rot.apply(&d0), rot.apply(&rot.apply(&d0))];
    let ratio = (s.q_max / s.q_min).ln();
    let qs: Vec<f64> = (0..s.q_samples)
        .map(|i| s.q_min * (ratio * i as f64 / (s.q_samples - 1) as f64).exp())
        .collect();
    let mut out = Vec::new();
    for d in dirs {
        let ys = qs
            .iter()
            .map(|&q| Ok(solver.solve(k + q * d, 2, DeltaSign::Zero)?.eigenvalues[1] - lambda_star))
            .collect::<Result<Vec<f64>, BandError>>()?;
        // least squares for y = alpha q + beta q^2
        let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&q, &y) in qs.iter().zip(&ys) {
            s11 += q * q;
            s12 += q * q * q;
            s22 += q * q * q * q;
            b1 += q * y;
            b2 += q * q * y;
        }
        let det = s11 * s22 - s12 * s12;
        let slope = (b1 * s22 - b2 * s12) / det;
        let curvature = (s11 * b2 - s12 * b1) / det;
        out.push(ConeFit {
            direction: [d[0], d[1]],
            slope,
            curvature,
            relative_correction: (curvature * s.q_max / slope).abs(),
        });
    }
    Ok(out)
}

/// `(L^b u1, u1)`, `(L^b u2, u2)` and `(L^b u1, u2)` in the cell-average normalisation.
pub fn perturbation_identities(d: &DiracPointData, solver: &PlaneWaveSolver) -> PerturbationReport {
    let basis = &d.at_k.as_ref().expect("Dirac data carries the K solve").basis;
    PerturbationReport {
        diag_plus: pair(solver.perturbation_form(basis, &d.u1, &d.u1)),
        diag_minus: pair(solver.perturbation_form(basis, &d.u2, &d.u2)),
        offdiag: pair(solver.perturbation_form(basis, &d.u1, &d.u2)),
    }
}
