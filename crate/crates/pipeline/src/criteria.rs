//! The twelve acceptance criteria, evaluated from stage payloads.

use crate::config::{RunConfig, Tolerances};
use crate::payload::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// A payload the criterion reads is missing.
    Skipped,
}

/// One measured quantity against its limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    /// `below`, `above` or `flag`.
    pub kind: String,
    pub passed: bool,
}

impl Check {
    pub fn below(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, limit, kind: "below".into(), passed: value <= limit }
    }

    pub fn above(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, limit, kind: "above".into(), passed: value >= limit }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Check { name: name.into(), value: ok as u8 as f64, limit: 1.0, kind: "flag".into(), passed: ok }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: String,
    pub status: Status,
    pub checks: Vec<Check>,
}

impl CriterionOutcome {
    fn from_checks(id: u8, checks: Vec<Check>) -> Self {
        let status = if checks.iter().all(|c| c.passed) { Status::Pass } else { Status::Fail };
        CriterionOutcome { id, name: criterion_name(id).into(), status, checks }
    }

    fn skipped(id: u8) -> Self {
        CriterionOutcome { id, name: criterion_name(id).into(), status: Status::Skipped, checks: Vec::new() }
    }

    /// Failing checks, or all of them when everything passed.
    pub fn detail(&self) -> String {
        let failing: Vec<&Check> = self.checks.iter().filter(|c| !c.passed).collect();
        let shown = if failing.is_empty() { self.checks.iter().collect() } else { failing };
        shown
            .iter()
            .map(|c| match c.kind.as_str() {
                "flag" => format!("{}={}", c.name, c.passed),
                "above" => format!("{}={:.3e}>={:.1e}", c.name, c.value, c.limit),
                _ => format!("{}={:.3e}<={:.1e}", c.name, c.value, c.limit),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn criterion_name(id: u8) -> &'static str {
    match id {
        1 => "Dirac degeneracy",
        2 => "perturbation identities",
        3 => "gap and inversion",
        4 => "straight-interface band",
        5 => "energy-flux identities",
        6 => "reflection symmetry",
        7 => "Green function",
        8 => "layer-operator identities",
        9 => "D2N group velocity",
        10 => "bending immunity",
        11 => "corner-mode scarcity",
        12 => "convergence discipline",
        _ => "unknown",
    }
}

/// Stage payloads available to the criteria.
#[derive(Debug, Clone, Default)]
pub struct Payloads {
    pub dirac: Option<DiracPayload>,
    pub gap: Option<GapPayload>,
    pub interface: Option<InterfacePayload>,
    pub green: Option<GreenPayload>,
    pub bend: Option<BendPayload>,
    pub scan: Option<ScanPayload>,
}

fn dirac_degeneracy(p: &DiracPayload, t: &Tolerances) -> Vec<Check> {
    let d = &p.dirac;
    let slopes: Vec<f64> = d.cones.iter().map(|c| c.slope).collect();
    let max = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    vec![
        Check::below("split", d.split, t.degeneracy * d.lambda_star.abs().max(1.0)),
        Check::below("cone_slope_spread", (max - min) / min, t.cone_slope),
    ]
}

fn perturbation(p: &DiracPayload, t: &Tolerances) -> Vec<Check> {
    let r = &p.perturbation;
    let scale = r.diag_plus[0].hypot(r.diag_plus[1]);
    let sum = (r.diag_plus[0] + r.diag_minus[0]).hypot(r.diag_plus[1] + r.diag_minus[1]);
    vec![
        Check::flag("nonzero_form", scale > 0.0),
        Check::below("diagonal_sum", sum / scale, t.perturbation),
        Check::below("off_diagonal", r.offdiag[0].hypot(r.offdiag[1]) / scale, t.perturbation),
    ]
}

fn gap_inversion(p: &GapPayload, t: &Tolerances) -> Vec<Check> {
    let g = &p.gap;
    vec![
        Check::above("width", g.width, f64::MIN_POSITIVE),
        Check::below("width_vs_first_order", ((g.width - g.predicted_width) / g.predicted_width).abs(), t.gap_width),
        Check::flag("inversion", g.inversion),
    ]
}

fn interface_band(p: &InterfacePayload, t: &Tolerances) -> Vec<Check> {
    let mut c = Vec::new();
    for (k, v) in p.valleys.iter().enumerate() {
        let name = if k == 0 { "single_mode_near_kappa_plus" } else { "single_mode_near_kappa_minus" };
        c.push(Check::flag(name, v.single_mode > 0 && v.multiple_modes == 0));
    }
    c.push(Check::above("transverse_decay_r2", p.decay.r_squared, t.interface_decay_r2));
    c.push(Check::above("transverse_decay_rate", p.decay.rate, f64::MIN_POSITIVE));
    c.push(Check::below("crossing_offset", p.crossing.offset(), p.crossing.tolerance));
    c
}

fn energy_flux(p: &InterfacePayload, t: &Tolerances) -> Vec<Check> {
    vec![Check::below("flux_identity", p.flux_error(), t.flux), Check::below("column_spread", p.column_spread(), t.flux)]
}

fn reflection(p: &InterfacePayload, t: &Tolerances) -> Vec<Check> {
    let r = &p.reflection;
    let traces = [r.trace_minus, r.conormal_minus, r.trace_plus, r.conormal_plus].into_iter().fold(0.0, f64::max);
    vec![Check::below("beta_modulus", (r.beta().norm() - 1.0).abs(), t.beta_modulus), Check::below("trace_relations", traces, t.trace_relation)]
}

fn green(p: &GreenPayload, t: &Tolerances) -> Vec<Check> {
    let f = &p.farfield;
    vec![
        Check::below("pde_residual", p.residual, t.green_residual),
        Check::below("contour_independence", p.independence, t.contour_independence),
        Check::below("farfield_amplitude_plus", f.amplitude_error_plus, t.farfield_amplitude),
        Check::below("farfield_amplitude_minus", f.amplitude_error_minus, t.farfield_amplitude),
        Check::above("remainder_rate_plus", f.decay_rate_plus, f64::MIN_POSITIVE),
        Check::above("remainder_rate_minus", f.decay_rate_minus, f64::MIN_POSITIVE),
        Check::above("remainder_r2_plus", f.r_squared_plus, t.farfield_r2),
        Check::above("remainder_r2_minus", f.r_squared_minus, t.farfield_r2),
        Check::below("reflection_covariance", p.covariance, t.covariance),
    ]
}

fn layer(p: &BendPayload, t: &Tolerances) -> Vec<Check> {
    let l = &p.layer;
    vec![
        Check::below("single_layer_jump", l.single_jump, t.layer),
        Check::below("double_layer_jump", l.double_jump, t.layer),
        Check::below("calderon", l.calderon, t.layer),
        Check::below("rotated_single_layer", l.rotated.single_layer, t.layer),
        Check::below("rotated_kstar", l.rotated.kstar, t.layer),
        Check::below("projection", l.projection.worst(), t.layer),
    ]
}

fn dtn(p: &BendPayload, t: &Tolerances) -> Vec<Check> {
    vec![Check::flag("s_invertible", p.layer.dtn.is_some()), Check::below("group_velocity", p.layer.dtn_error().unwrap_or(f64::INFINITY), t.dtn)]
}

/// Whether both parities at one frequency meet every bending-immunity limit.
pub fn bend_point_passes(b: &BendPoint, t: &Tolerances) -> bool {
    let ok = |s: &Option<BendSummary>| {
        s.as_ref().is_some_and(|s| {
            let r = &s.residuals;
            s.nonzero()
                && r.flux_balance <= t.flux_balance
                && r.continuity() <= t.continuity
                && r.decay_slope < 0.0
                && r.decay_r_squared >= t.bend_decay_r2
        })
    };
    b.status == "ok" && ok(&b.odd) && ok(&b.even)
}

fn bending(p: &BendPayload, t: &Tolerances) -> Vec<Check> {
    let away: Vec<&BendPoint> = p.sweep.iter().filter(|b| b.status != "near_dip").collect();
    let passing = away.iter().filter(|b| bend_point_passes(b, t)).count();
    vec![
        Check::above("frequencies_away_from_dips", away.len() as f64, t.bend_min_lambdas as f64),
        Check::above("frequencies_passing", passing as f64, away.len().max(t.bend_min_lambdas) as f64),
    ]
}

fn scarcity(p: &ScanPayload, t: &Tolerances) -> Vec<Check> {
    vec![
        Check::above("grid_points", p.report.points.len() as f64, 1.0),
        Check::below("sub_threshold_points", p.report.below_threshold as f64, t.max_dips as f64),
    ]
}

fn convergence(p: &BendPayload, t: &Tolerances) -> Vec<Check> {
    let c = &p.convergence;
    let noise = t.convergence_noise;
    let v = |o: Option<f64>| o.unwrap_or(f64::INFINITY);
    let pairs = [
        ("refine_flux", c.coarse.flux, c.fine.flux),
        ("refine_layer", c.coarse.layer, c.fine.layer),
        ("refine_dtn", v(c.coarse.dtn), v(c.fine.dtn)),
        ("refine_bend", v(c.coarse.bend), v(c.fine.bend)),
        ("extend_flux", c.truncated.flux, c.fine.flux),
        ("extend_layer", c.truncated.layer, c.fine.layer),
        ("extend_dtn", v(c.truncated.dtn), v(c.fine.dtn)),
        ("extend_bend", v(c.truncated.bend), v(c.fine.bend)),
    ];
    // the refined residual may exceed the coarse one only by the noise floor
    pairs.iter().map(|&(name, before, after)| Check::below(name, after - before, noise)).collect()
}

/// Evaluates the enabled criteria; criteria whose payload is missing are skipped.
pub fn evaluate(cfg: &RunConfig, p: &Payloads) -> Vec<CriterionOutcome> {
    let t = &cfg.tolerances;
    let mut ids: Vec<u8> = cfg.criteria.clone();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter()
        .map(|id| {
            let checks = match id {
                1 => p.dirac.as_ref().map(|x| dirac_degeneracy(x, t)),
                2 => p.dirac.as_ref().map(|x| perturbation(x, t)),
                3 => p.gap.as_ref().map(|x| gap_inversion(x, t)),
                4 => p.interface.as_ref().map(|x| interface_band(x, t)),
                5 => p.interface.as_ref().map(|x| energy_flux(x, t)),
                6 => p.interface.as_ref().map(|x| reflection(x, t)),
                7 => p.green.as_ref().map(|x| green(x, t)),
                8 => p.bend.as_ref().map(|x| layer(x, t)),
                9 => p.bend.as_ref().map(|x| dtn(x, t)),
                10 => p.bend.as_ref().map(|x| bending(x, t)),
                11 => p.scan.as_ref().map(|x| scarcity(x, t)),
                12 => p.bend.as_ref().map(|x| convergence(x, t)),
                _ => None,
            };
            match checks {
                Some(c) => CriterionOutcome::from_checks(id, c),
                None => CriterionOutcome::skipped(id),
            }
        })
        .collect()
}
