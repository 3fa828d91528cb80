//! Numerical work of each stage, on top of the five solver crates.

use crate::config::RunConfig;
use crate::payload::*;
use bulkbands::{
    detect_dirac, gap_and_inversion, perturbation_identities, DeltaSign, DiracPointData, DiracSettings, PlaneWaveSolver,
};
use layerpot::{
    assemble_operators, calderon_commutator, double_layer_jump, dtn_group_velocity, projection_identity_check, rotated_reach,
    rotated_relations, single_layer_jump, solve_bent_mode, BendSettings, BentModeSolution, BoundaryOperatorSet,
    LayerError, Parity, ScanSettings, StraightModes,
};
use lattice::{build_medium, MediumSpec};
use num_complex::Complex64 as C64;
use outgreen::{
    build_contour, contour_independence, farfield_along_e, reflection_covariance, transverse_decay_check, GreenEvaluator,
};
use std::f64::consts::PI;
use std::sync::OnceLock;
use stripmodes::{
    discrete_dirac_point, discrete_gap, energy_flux, reflection_relation, transverse_decay, BandSettings,
    InterfaceBandTable, SampleFlag, StripOperator,
};

pub type BoxError = Box<dyn std::error::Error + Send + Sync>;

/// Lazily built objects that several stages share within one run.
pub struct Context {
    pub cfg: RunConfig,
    medium: OnceLock<MediumSpec>,
    solver: OnceLock<PlaneWaveSolver>,
    dirac: OnceLock<DiracPointData>,
    table: OnceLock<InterfaceBandTable>,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Self {
        Context { cfg, medium: OnceLock::new(), solver: OnceLock::new(), dirac: OnceLock::new(), table: OnceLock::new() }
    }

    pub fn medium(&self) -> Result<&MediumSpec, BoxError> {
        if let Some(m) = self.medium.get() {
            return Ok(m);
        }
        let m = build_medium(&self.cfg.medium)?;
        Ok(self.medium.get_or_init(|| m))
    }

    pub fn solver(&self) -> Result<&PlaneWaveSolver, BoxError> {
        if let Some(s) = self.solver.get() {
            return Ok(s);
        }
        let s = PlaneWaveSolver::new(self.medium()?, self.cfg.discretization.shells);
        Ok(self.solver.get_or_init(|| s))
    }

    pub fn dirac(&self) -> Result<&DiracPointData, BoxError> {
        if let Some(d) = self.dirac.get() {
            return Ok(d);
        }
        let settings = DiracSettings { degeneracy_tol: self.cfg.tolerances.degeneracy, ..DiracSettings::default() };
        let d = detect_dirac(self.solver()?, &settings)?;
        Ok(self.dirac.get_or_init(|| d))
    }

    pub fn table(&self) -> Result<&InterfaceBandTable, BoxError> {
        if let Some(t) = self.table.get() {
            return Ok(t);
        }
        let t = interface_table(self.medium()?, &self.cfg, self.cfg.discretization.resolution)?;
        Ok(self.table.get_or_init(|| t))
    }
}

pub fn interface_table(med: &MediumSpec, cfg: &RunConfig, resolution: usize) -> Result<InterfaceBandTable, BoxError> {
    let d = &cfg.discretization;
    let gap = discrete_gap(med, resolution, d.gap_mesh).ok_or("the finite-element bands overlap: no common gap")?;
    let settings = BandSettings { resolution, t_cells: d.t_cells, samples: d.kappa_samples, ..BandSettings::default() };
    Ok(InterfaceBandTable::build(StripOperator::interface(med, resolution, d.t_cells), gap, settings)?)
}

pub fn mid_window(tab: &InterfaceBandTable) -> f64 {
    0.5 * (tab.i0.0 + tab.i0.1)
}

/// Rows `(arc length, kx, ky, lambda_1..)` of the unperturbed bands along the path.
pub fn bands(ctx: &Context) -> Result<Vec<Vec<f64>>, BoxError> {
    let solver = ctx.solver()?;
    let path = bulkbands::path::high_symmetry_path(solver, ctx.cfg.sweeps.path_per_leg);
    let rows = bulkbands::path::bands_along_path(solver, ctx.cfg.sweeps.path_per_leg, ctx.cfg.sweeps.path_bands, DeltaSign::Zero)?;
    Ok(path.iter().zip(rows).map(|((s, k), (_, l))| [vec![*s, k[0], k[1]], l].concat()).collect())
}

pub fn dirac(ctx: &Context) -> Result<DiracPayload, BoxError> {
    let d = ctx.dirac()?.clone();
    let perturbation = perturbation_identities(&d, ctx.solver()?);
    Ok(DiracPayload { config: ctx.cfg.clone(), dirac: d, perturbation })
}

pub fn gap(ctx: &Context) -> Result<GapPayload, BoxError> {
    let gap = gap_and_inversion(ctx.solver()?, ctx.dirac()?, ctx.cfg.discretization.bz_mesh)?;
    Ok(GapPayload { config: ctx.cfg.clone(), gap })
}

const VALLEY_RADIUS: f64 = 0.06;

pub fn interface(ctx: &Context) -> Result<InterfacePayload, BoxError> {
    let cfg = &ctx.cfg;
    let med = ctx.medium()?;
    let tab = ctx.table()?;
    let lambda = mid_window(tab);
    let kappa = tab.kappa_of_lambda(lambda)?;
    let valleys = [2.0 * PI / 3.0, -2.0 * PI / 3.0]
        .iter()
        .map(|&k| {
            let near: Vec<usize> = (0..tab.kappa.len()).filter(|&i| (tab.kappa[i] - k).abs() < VALLEY_RADIUS).collect();
            ValleyCount {
                kappa: k,
                samples: near.len(),
                single_mode: near.iter().filter(|&&i| tab.flags[i].is_none()).count(),
                multiple_modes: near.iter().filter(|&&i| matches!(tab.flags[i], Some(SampleFlag::MultipleInGapModes(_)))).count(),
            }
        })
        .collect();
    let (up, um) = tab.mode_pair(lambda)?;
    let decay = transverse_decay(&tab.operator, &up);
    let n = cfg.discretization.resolution;
    let star = discrete_dirac_point(med, n).lambda_star;
    let star_fine = discrete_dirac_point(med, 2 * n).lambda_star;
    let delta = cfg.medium.delta;
    let crossing = Crossing {
        lambda_star: star,
        lambda_star_fine: star_fine,
        at_valleys: [tab.interpolate(2.0 * PI / 3.0).map(|v| v.0), tab.interpolate(-2.0 * PI / 3.0).map(|v| v.0)],
        tolerance: delta * delta * star.abs().max(1.0) + (star - star_fine).abs(),
    };
    let flux = [0i64, 1, 5]
        .iter()
        .map(|&col| FluxSample {
            column: col,
            plus: energy_flux(&tab.operator, &up, &up, col),
            minus: energy_flux(&tab.operator, &um, &um, col),
            cross: energy_flux(&tab.operator, &up, &um, col),
        })
        .collect();
    let reflection = reflection_relation(tab, lambda)?;
    Ok(InterfacePayload {
        config: cfg.clone(),
        gap: tab.gap,
        i0: tab.i0,
        d_star: tab.d_star,
        lambda,
        kappa,
        valleys,
        decay,
        crossing,
        flux,
        reflection,
    })
}

/// Rows `(i, j, s, t, re, im)` of the mid-window right-going mode on cell 0.
pub fn interface_mode_grid(ctx: &Context) -> Result<Vec<[f64; 6]>, BoxError> {
    let tab = ctx.table()?;
    let (up, _) = tab.mode_pair(mid_window(tab))?;
    let mesh = &tab.operator.mesh;
    let per = 3.0 * mesh.n as f64;
    Ok((0..mesh.len())
        .map(|k| {
            let (i, j) = mesh.raw(k);
            [i as f64, j as f64, i as f64 / mesh.n as f64, j as f64 / per, up.vector[k].re, up.vector[k].im]
        })
        .collect())
}

/// Rows `(kappa, lambda^E, slope)` where the interface band is present.
pub fn interface_band_rows(ctx: &Context) -> Result<Vec<[f64; 3]>, BoxError> {
    let tab = ctx.table()?;
    Ok((0..tab.kappa.len())
        .filter_map(|i| Some([tab.kappa[i], tab.lambda[i]?, tab.slope[i].unwrap_or(f64::NAN)]))
        .collect())
}

pub struct GreenStage {
    pub payload: GreenPayload,
    /// Rows `(i, j, s, t, re, im)` of the point-source field.
    pub field: Vec<[f64; 6]>,
}

pub fn green(ctx: &Context) -> Result<GreenStage, BoxError> {
    let cfg = &ctx.cfg;
    let tab = ctx.table()?;
    let op = &tab.operator;
    let lambda = mid_window(tab);
    let settings = cfg.contour.settings();
    let c = build_contour(tab, C64::new(lambda, 0.0), &settings)?;
    let contour = ContourSummary { eta: c.eta, nodes: c.nodes.len(), clearance: c.clearance, kappa_plus: c.kappa_plus, kappa_minus: c.kappa_minus };
    let g = GreenEvaluator::build(op, c, cfg.discretization.farfield_reach)?;
    let y = cfg.sweeps.source;
    let (cell, u) = g.point_source(op, y)?;
    let mut source = vec![C64::new(0.0, 0.0); op.mesh.len()];
    source[op.mesh.locate(y).ok_or("source on a Dirichlet row")?.1] = C64::new(1.0, 0.0);
    let residual = u.residual(op, C64::new(lambda, 0.0), &source);
    let independence = contour_independence(tab, lambda, cfg.contour.eta, cfg.contour.alternate_eta, &settings)?;
    let pairs = [((5, 7), (3, 2)), ((20, -30), (1, 0)), ((-9, 4), (6, -5)), ((0, 11), (0, -4))];
    let covariance = reflection_covariance(&g, op, &pairs)?;
    let (up, um) = tab.mode_pair(lambda)?;
    let farfield = farfield_along_e(&g, op, &up, &um, y, cfg.sweeps.farfield_probe, cfg.sweeps.farfield_fit)?;
    let transverse = transverse_decay_check(&g, op, y)?;
    let n = op.mesh.n as i64;
    let per = 3.0 * n as f64;
    let reach = cfg.sweeps.field_cells;
    let mut field = Vec::new();
    for m in -reach..=reach {
        let Some(c) = u.cell(m) else { continue };
        for (k, v) in c.iter().enumerate() {
            let (i, j) = op.mesh.raw(k);
            let col = i + (m + cell) * n;
            field.push([col as f64, j as f64, col as f64 / n as f64, j as f64 / per, v.re, v.im]);
        }
    }
    Ok(GreenStage {
        payload: GreenPayload { config: cfg.clone(), lambda, contour, residual, independence, covariance, farfield, transverse },
        field,
    })
}

fn summary(s: &BentModeSolution) -> BendSummary {
    BendSummary {
        r_l: s.r_l,
        l_l: s.l_l,
        r_r: s.r_r,
        l_r: s.l_r,
        beta: s.beta,
        l_coefficient: s.l_coefficient(),
        sigma_ratio: s.sigma_ratio,
        residuals: s.residuals,
    }
}

fn is_near_dip(e: &LayerError) -> bool {
    matches!(e, LayerError::NearSingularS { .. } | LayerError::ExceptionalFrequency { .. })
}

fn layer_residuals(
    g: &GreenEvaluator,
    op: &StripOperator,
    ops: &BoundaryOperatorSet,
    modes: &StraightModes,
    cfg: &RunConfig,
) -> Result<LayerResiduals, BoxError> {
    let sj = single_layer_jump(g, op, ops)?;
    let dj = double_layer_jump(g, op, ops)?;
    let rotated = rotated_relations(g, op, ops, ROTATED_HALF_WIDTH.min(ops.half_width), 4)?;
    let t = &cfg.tolerances;
    Ok(LayerResiduals {
        half_width: ops.half_width,
        single_jump: sj.jump,
        double_jump: dj.jump,
        calderon: calderon_commutator(ops),
        rotated,
        projection: projection_identity_check(ops, &modes.plus, &modes.minus),
        dtn: dtn_group_velocity(ops, &modes.minus, t.tikhonov, t.sigma_threshold).ok(),
    })
}

/// Samples of the rotated check lie within this `|t|`, so their images stay in the strip.
const ROTATED_HALF_WIDTH: f64 = 3.0;

fn bend_settings(cfg: &RunConfig) -> BendSettings {
    BendSettings { relative_tau: cfg.tolerances.tikhonov, threshold: cfg.tolerances.sigma_threshold }
}

fn bend_worst(odd: &BentModeSolution, even: &BentModeSolution) -> f64 {
    [odd, even].iter().map(|s| s.residuals.flux_balance.max(s.residuals.continuity())).fold(0.0, f64::max)
}

struct Level {
    residuals: LevelResiduals,
    layer: LayerResiduals,
    solutions: Option<(BentModeSolution, BentModeSolution)>,
    modes: StraightModes,
}

fn level(tab: &InterfaceBandTable, g: &GreenEvaluator, half_width: f64, cfg: &RunConfig) -> Result<Level, BoxError> {
    let op = &tab.operator;
    let lambda = g.lambda().re;
    let ops = assemble_operators(g, op, half_width)?;
    let modes = StraightModes::new(tab, &ops)?;
    let layer = layer_residuals(g, op, &ops, &modes, cfg)?;
    let settings = bend_settings(cfg);
    let odd = solve_bent_mode(g, op, &ops, &modes, Parity::Odd, &settings);
    let even = solve_bent_mode(g, op, &ops, &modes, Parity::Even, &settings);
    let solutions = match (odd, even) {
        (Ok(a), Ok(b)) => Some((a, b)),
        _ => None,
    };
    let slope = modes.up.slope.abs();
    let flux = [(&modes.up, modes.up.slope), (&modes.um, modes.um.slope)]
        .iter()
        .map(|(m, s)| (energy_flux(op, m, m, 0) - C64::new(0.0, *s)).norm() / slope)
        .fold(energy_flux(op, &modes.up, &modes.um, 0).norm() / slope, f64::max);
    let residuals = LevelResiduals {
        resolution: op.mesh.n,
        half_width,
        lambda,
        flux,
        layer: layer.worst(),
        dtn: layer.dtn_error(),
        bend: solutions.as_ref().map(|(a, b)| bend_worst(a, b)),
    };
    Ok(Level { residuals, layer, solutions, modes })
}

fn evaluator(tab: &InterfaceBandTable, lambda: f64, cfg: &RunConfig) -> Result<GreenEvaluator, BoxError> {
    let c = build_contour(tab, C64::new(lambda, 0.0), &cfg.contour.settings())?;
    let reach = cfg.discretization.reach.max(rotated_reach(&tab.operator, ROTATED_HALF_WIDTH));
    Ok(GreenEvaluator::build(&tab.operator, c, reach)?)
}

pub struct BendStage {
    pub payload: BendPayload,
    /// Rows `(i, j, s, t, odd re, odd im, even re, even im)` of the mid-window bent modes.
    pub field: Vec<[f64; 8]>,
}

fn sweep_point(tab: &InterfaceBandTable, lambda: f64, cfg: &RunConfig) -> BendPoint {
    let run = || -> Result<BendPoint, BoxError> {
        let op = &tab.operator;
        let g = evaluator(tab, lambda, cfg)?;
        let ops = assemble_operators(&g, op, cfg.discretization.half_width())?;
        let modes = StraightModes::new(tab, &ops)?;
        let settings = bend_settings(cfg);
        let mut out = BendPoint { lambda, status: "ok".into(), odd: None, even: None };
        for parity in [Parity::Odd, Parity::Even] {
            match solve_bent_mode(&g, op, &ops, &modes, parity, &settings) {
                Ok(s) => match parity {
                    Parity::Odd => out.odd = Some(summary(&s)),
                    Parity::Even => out.even = Some(summary(&s)),
                },
                Err(e) if is_near_dip(&e) => out.status = "near_dip".into(),
                Err(e) => return Err(e.into()),
            }
        }
        Ok(out)
    };
    run().unwrap_or_else(|e| BendPoint { lambda, status: format!("error: {e}"), odd: None, even: None })
}

pub fn bend(ctx: &Context) -> Result<BendStage, BoxError> {
    let cfg = &ctx.cfg;
    let tab = ctx.table()?;
    let lambda = mid_window(tab);
    let hw = cfg.discretization.half_width();
    let g = evaluator(tab, lambda, cfg)?;
    let fine = level(tab, &g, hw, cfg)?;
    let truncated = level(tab, &g, (hw - 2.0).max(1.0), cfg)?;
    let coarse_tab = interface_table(ctx.medium()?, cfg, cfg.discretization.coarse_resolution)?;
    let coarse_g = evaluator(&coarse_tab, mid_window(&coarse_tab), cfg)?;
    let coarse = level(&coarse_tab, &coarse_g, hw, cfg)?;
    drop(coarse_g);

    let op = &tab.operator;
    let n = op.mesh.n as i64;
    let per = 3.0 * n as f64;
    let mut field = Vec::new();
    if let Some((odd, even)) = &fine.solutions {
        let jm = op.mesh.j_max();
        let reach = cfg.sweeps.field_cells * n;
        for col in -reach..=reach {
            for j in (-jm + 1)..jm {
                let a = odd.value(op, &fine.modes, (col, j));
                let b = even.value(op, &fine.modes, (col, j));
                field.push([col as f64, j as f64, col as f64 / n as f64, j as f64 / per, a.re, a.im, b.re, b.im]);
            }
        }
    }
    drop(g);

    let k = cfg.sweeps.bend_lambdas;
    let (lo, hi) = tab.i0;
    let margin = cfg.sweeps.bend_margin * (hi - lo);
    let lambdas: Vec<f64> =
        (0..k).map(|i| if k == 1 { lambda } else { lo + margin + (hi - lo - 2.0 * margin) * i as f64 / (k - 1) as f64 }).collect();
    let sweep = lambdas.iter().map(|&l| sweep_point(tab, l, cfg)).collect();
    Ok(BendStage {
        payload: BendPayload {
            config: cfg.clone(),
            lambda,
            layer: fine.layer,
            sweep,
            convergence: Convergence { coarse: coarse.residuals, fine: fine.residuals, truncated: truncated.residuals },
        },
        field,
    })
}

pub fn scan(ctx: &Context) -> Result<ScanPayload, BoxError> {
    let cfg = &ctx.cfg;
    let tab = ctx.table()?;
    let (lo, hi) = tab.i0;
    let k = cfg.sweeps.scan_points;
    // cell midpoints keep the grid off the window ends, where the contour radius is tight
    let lambdas: Vec<f64> = (0..k).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / k as f64).collect();
    let settings = ScanSettings {
        half_width: cfg.discretization.half_width(),
        contour: cfg.contour.scan_settings(),
        threshold: cfg.tolerances.sigma_threshold,
    };
    let report = layerpot::corner_mode_scan(tab, &lambdas, &settings)?;
    Ok(ScanPayload { config: cfg.clone(), i0: tab.i0, threshold: settings.threshold, report })
}
