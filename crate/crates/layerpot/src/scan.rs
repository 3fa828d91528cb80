//! Sweep of the smallest singular values of `S` and `N` over the interface window.

use crate::operators::{assemble_operators, norm, LayerError, RegularizedInverse};
use num_complex::Complex64 as C64;
use outgreen::{build_contour, ContourSettings, GreenEvaluator};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use stripmodes::{linear_fit, InterfaceBandTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub half_width: f64,
    pub contour: ContourSettings,
    /// `sigma_min / sigma_max` below which a point counts as a dip.
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub lambda: f64,
    /// `sigma_min / sigma_max` of `S` and of `N`.
    pub sigma_s: f64,
    pub sigma_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerCandidate {
    pub lambda: f64,
    pub operator: String,
    pub sigma_ratio: f64,
    /// Decay rates per unit `t` of the near-null density towards `t > 0` and `t < 0`.
    pub decay_up: f64,
    pub decay_down: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub points: Vec<ScanPoint>,
    pub candidates: Vec<CornerCandidate>,
    /// Points whose ratio is below threshold, for either operator.
    pub below_threshold: usize,
    /// Runs of consecutive sub-threshold points, for either operator.
    pub dips: usize,
}

fn decay_along(t: &[f64], v: &[C64], up: bool) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(v)
        .filter(|(t, z)| (if up { **t > 0.0 } else { **t < 0.0 }) && z.norm() > 0.0)
        .map(|(t, z)| (t.abs(), z.norm().ln()))
        .unzip();
    if xs.len() < 2 {
        return 0.0;
    }
    -linear_fit(&xs, &ys).1
}

fn runs(flags: &[bool]) -> usize {
    flags.iter().enumerate().filter(|&(i, &f)| f && (i == 0 || !flags[i - 1])).count()
}

/// `sigma_min` curves of `S` and `N`; sub-threshold local minima become corner-mode candidates.
pub fn corner_mode_scan(tab: &InterfaceBandTable, lambdas: &[f64], settings: &ScanSettings) -> Result<ScanReport, LayerError> {
    let op = &tab.operator;
    let per_point: Result<Vec<(ScanPoint, Vec<f64>, Vec<C64>, Vec<C64>)>, LayerError> = lambdas
        .par_iter()
        .map(|&lambda| {
            let c = build_contour(tab, C64::new(lambda, 0.0), &settings.contour)?;
            let g = GreenEvaluator::build(op, c, 2)?;
            let ops = assemble_operators(&g, op, settings.half_width)?;
            let s = RegularizedInverse::new(&ops.s, 0.0)?;
            let n = RegularizedInverse::new(&ops.n, 0.0)?;
            let point = ScanPoint { lambda, sigma_s: s.ratio(), sigma_n: n.ratio() };
            Ok((point, ops.t.clone(), s.null_vector(), n.null_vector()))
        })
        .collect();
    let per_point = per_point?;
    let points: Vec<ScanPoint> = per_point.iter().map(|p| p.0).collect();
    let mut candidates = Vec::new();
    let mut below = 0;
    let mut dips = 0;
    for (name, pick) in [("S", 0usize), ("N", 1usize)] {
        let sig: Vec<f64> = points.iter().map(|p| if pick == 0 { p.sigma_s } else { p.sigma_n }).collect();
        let flags: Vec<bool> = sig.iter().map(|&s| s < settings.threshold).collect();
        below += flags.iter().filter(|&&f| f).count();
        dips += runs(&flags);
        for i in 0..sig.len() {
            let left = i == 0 || sig[i] < sig[i - 1];
            let right = i + 1 == sig.len() || sig[i] < sig[i + 1];
            if flags[i] && left && right {
                let (_, t, vs, vn) = &per_point[i];
                let v = if pick == 0 { vs } else { vn };
                let scale = norm(v);
                let v: Vec<C64> = v.iter().map(|z| z / scale).collect();
                candidates.push(CornerCandidate {
                    lambda: points[i].lambda,
                    operator: name.to_string(),
                    sigma_ratio: sig[i],
                    decay_up: decay_along(t, &v, true),
                    decay_down: decay_along(t, &v, false),
                });
            }
        }
    }
    Ok(ScanReport { points, candidates, below_threshold: below, dips })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_count_blocks() {
        assert_eq!(runs(&[false, true, true, false, true]), 2);
        assert_eq!(runs(&[]), 0);
    }

    #[test]
    fn decay_of_exponential() {
        let t: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.1).collect();
        let v: Vec<C64> = t.iter().map(|x| C64::new((-0.7 * x.abs()).exp(), 0.0)).collect();
        assert!((decay_along(&t, &v, true) - 0.7).abs() < 1e-12);
        assert!((decay_along(&t, &v, false) - 0.7).abs() < 1e-12);
    }
}
