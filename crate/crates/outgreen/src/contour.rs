//! Integration contours in the quasi-momentum for the limiting-absorption Green function.

use gauss_quad::GaussLegendre;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::num::NonZeroUsize;
use stripmodes::InterfaceBandTable;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ContourError {
    #[error("radius {eta} is too large for the poles at {kappa_minus} and {kappa_plus}")]
    EtaTooLarge { eta: f64, kappa_minus: f64, kappa_plus: f64 },
    #[error("real part {0} of lambda is outside the interface window")]
    OutsideWindow(f64),
    #[error("contour passes within {0:e} of the interface band")]
    PoleTooClose(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSettings {
    pub eta: f64,
    pub segment_nodes: usize,
    pub semicircle_nodes: usize,
    /// `Im lambda` from which the contour is the real period instead of `C1`.
    pub real_axis_from: f64,
}

impl Default for ContourSettings {
    // evanescent poles of the symbol near Im kappa = 0.2 need more than 24/16 nodes for 1e-6
    fn default() -> Self {
        ContourSettings { eta: 0.15, segment_nodes: 48, semicircle_nodes: 32, real_axis_from: 0.01 }
    }
}

impl ContourSettings {
    /// Cheaper rule for scans that only need a few digits.
    pub fn coarse() -> Self {
        ContourSettings { segment_nodes: 24, semicircle_nodes: 16, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    pub lambda: C64,
    pub eta: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub nodes: Vec<C64>,
    pub weights: Vec<C64>,
    /// Index of the node at `-kappa` for every node, when the contour is symmetric.
    pub mirror: Option<Vec<usize>>,
    /// `min |lambda^E(kappa) - lambda|` over the nodes, on the interpolated band continuation.
    pub clearance: f64,
}

fn gl(n: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(NonZeroUsize::new(n).expect("positive node count")).as_node_weight_pairs().to_vec()
}

fn push_segment(nodes: &mut Vec<C64>, weights: &mut Vec<C64>, a: f64, b: f64, n: usize) {
    for (x, w) in gl(n) {
        nodes.push(C64::new(0.5 * (a + b) + 0.5 * (b - a) * x, 0.0));
        weights.push(C64::new(0.5 * (b - a) * w, 0.0));
    }
}

/// Half circle from `c - eta` to `c + eta`, through `c + i eta` when `upper`.
fn push_semicircle(nodes: &mut Vec<C64>, weights: &mut Vec<C64>, c: f64, eta: f64, upper: bool, n: usize) {
    for (x, w) in gl(n) {
        // theta runs from pi to 0 (upper) or from pi to 2 pi (lower)
        let (theta, dtheta) = if upper { (0.5 * PI * (1.0 - x), -0.5 * PI) } else { (PI + 0.5 * PI * (1.0 + x), 0.5 * PI) };
        let z = C64::from_polar(eta, theta);
        nodes.push(C64::new(c, 0.0) + z);
        weights.push(C64::i() * z * dtheta * w);
    }
}

/// Composite Gauss-Legendre panels refined geometrically towards `poles`, down to `finest`.
fn graded_real_line(poles: &[f64], finest: f64, n: usize) -> (Vec<C64>, Vec<C64>) {
    let mut cuts = vec![-PI, PI];
    for &p in poles {
        let mut d = finest;
        while d < 1.0 {
            for s in [p - d, p + d] {
                if s > -PI && s < PI {
                    cuts.push(s);
                }
            }
            d *= 2.0;
        }
        cuts.push(p);
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in cuts.windows(2) {
        push_segment(&mut nodes, &mut weights, w[0], w[1], n);
    }
    (nodes, weights)
}

/// Contour `C1` for real `lambda` in the window, or a graded real line when `Im lambda > 0`.
///
/// The deformation passes below the pole at `kappa_+` and above the pole at `kappa_-`, which
/// selects the field radiating away from the source along the interface.
pub fn build_contour(tab: &InterfaceBandTable, lambda: C64, s: &ContourSettings) -> Result<ContourSpec, ContourError> {
    let k = tab.kappa_of_lambda(lambda.re).map_err(|_| ContourError::OutsideWindow(lambda.re))?;
    // the band is even in kappa, so both poles are placed symmetrically
    let kp = 0.5 * (k.kappa_plus - k.kappa_minus);
    let km = -kp;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    if lambda.im >= s.real_axis_from {
        let pole = lambda.im / k.slope_plus.abs();
        let (n, w) = graded_real_line(&[km, kp], 0.5 * pole, s.segment_nodes.min(16));
        nodes = n;
        weights = w;
    } else {
        let eta = s.eta;
        if !(eta > 0.0) || km + eta >= kp - eta || km - eta <= -PI || kp + eta >= PI {
            return Err(ContourError::EtaTooLarge { eta, kappa_minus: km, kappa_plus: kp });
        }
        push_segment(&mut nodes, &mut weights, -PI, km - eta, s.segment_nodes);
        push_semicircle(&mut nodes, &mut weights, km, eta, true, s.semicircle_nodes);
        push_segment(&mut nodes, &mut weights, km + eta, kp - eta, s.segment_nodes);
        push_semicircle(&mut nodes, &mut weights, kp, eta, false, s.semicircle_nodes);
        push_segment(&mut nodes, &mut weights, kp + eta, PI, s.segment_nodes);
    }
    let mut clearance = f64::INFINITY;
    for z in &nodes {
        if let Some(v) = band_continuation(tab, *z) {
            clearance = clearance.min((v - lambda).norm());
        }
    }
    if clearance <= 0.0 {
        return Err(ContourError::PoleTooClose(clearance));
    }
    let mirror = mirror_map(&nodes, &weights);
    Ok(ContourSpec { lambda, eta: s.eta, kappa_plus: kp, kappa_minus: km, nodes, weights, mirror, clearance })
}

/// Pairs every node `z` with the node at `-z` carrying the same weight.
fn mirror_map(nodes: &[C64], weights: &[C64]) -> Option<Vec<usize>> {
    nodes
        .iter()
        .zip(weights)
        .map(|(z, w)| {
            let j = (0..nodes.len()).min_by(|&a, &b| (nodes[a] + z).norm().partial_cmp(&(nodes[b] + z).norm()).unwrap())?;
            ((nodes[j] + z).norm() < 1e-12 && (weights[j] - w).norm() < 1e-12 * w.norm().max(1.0)).then_some(j)
        })
        .collect()
}

/// Cubic continuation of the interface band to complex `kappa` near a tracked branch.
pub fn band_continuation(tab: &InterfaceBandTable, z: C64) -> Option<C64> {
    let h = tab.step();
    let i = ((z.re - tab.kappa[0]) / h).floor() as i64;
    for (lo, hi) in [tab.plus, tab.minus] {
        let (lo, hi) = (lo as i64, hi as i64);
        if i < lo || i + 1 > hi || hi - lo < 3 {
            continue;
        }
        let s = (i - 1).clamp(lo, hi - 3) as usize;
        let mut v = C64::new(0.0, 0.0);
        for a in 0..4 {
            let mut l = C64::new(1.0, 0.0);
            for b in 0..4 {
                if a != b {
                    l *= (z - tab.kappa[s + b]) / (tab.kappa[s + a] - tab.kappa[s + b]);
                }
            }
            v += l * tab.lambda[s + a].unwrap();
        }
        return Some(v);
    }
    None
}
