//! Interface band `lambda^E(kappa)` of the strip, tracked through the bulk gap.

use crate::assembly::{dot, AssemblyError, StripOperator};
use crate::eigen::{eigs_near, LanczosSettings};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BandTableError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("no eigenvalue inside the gap near kappa = {kappa}")]
    NoInGapMode { kappa: f64 },
    #[error("{count} eigenvalues inside the gap at kappa = {kappa}")]
    MultipleInGapModes { kappa: f64, count: usize },
    #[error("the interface branch has no well-sloped in-gap range")]
    EmptyWindow,
    #[error("lambda = {0} lies outside the interface window")]
    OutsideWindow(f64),
}

/// Per-sample observation that is recorded rather than raised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SampleFlag {
    NoInGapMode,
    MultipleInGapModes(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSettings {
    /// Grid points per period along each skew direction unit.
    pub resolution: usize,
    /// Half-width of the strip in cells.
    pub t_cells: usize,
    /// Number of `kappa` intervals over `[-pi, pi]`.
    pub samples: usize,
    /// Half-width of the spectral window searched around the gap centre.
    pub radius: f64,
    pub lanczos: LanczosSettings,
}

impl Default for BandSettings {
    fn default() -> Self {
        BandSettings { resolution: 8, t_cells: 8, samples: 400, radius: 2.5, lanczos: LanczosSettings::default() }
    }
}

/// Eigenpair on the interface branch at one `kappa`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceMode {
    pub kappa: f64,
    pub lambda: f64,
    /// Hellmann-Feynman slope.
    pub slope: f64,
    /// `M`-normalized, real and positive at the node where `Gamma` meets `E`.
    pub vector: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct InterfaceBandTable {
    pub operator: StripOperator,
    pub settings: BandSettings,
    pub gap: (f64, f64),
    pub centre: f64,
    pub kappa: Vec<f64>,
    /// Window eigenvalues per sample.
    pub spectra: Vec<Vec<f64>>,
    pub flags: Vec<Option<SampleFlag>>,
    pub lambda: Vec<Option<f64>>,
    pub slope: Vec<Option<f64>>,
    pub modes: Vec<Option<Vec<C64>>>,
    pub d_star_at: Vec<Option<f64>>,
    pub d_star: f64,
    /// Tracked index ranges of the branches seeded at `+2pi/3` and `-2pi/3`.
    pub plus: (usize, usize),
    pub minus: (usize, usize),
    pub i0: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaPair {
    pub kappa_plus: f64,
    pub slope_plus: f64,
    pub kappa_minus: f64,
    pub slope_minus: f64,
}

/// Rotates the mode so the sample at `Gamma` and `t = 0` is real positive.
pub fn fix_phase(op: &StripOperator, u: &mut [C64]) {
    let mesh = &op.mesh;
    let anchor = mesh.index(0, mesh.row_index(0).unwrap());
    let scale = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let z = if u[anchor].norm() > 1e-8 * scale {
        u[anchor]
    } else {
        *u.iter().max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap()).unwrap()
    };
    let ph = z.conj() / z.norm();
    u.iter_mut().for_each(|x| *x *= ph);
}

fn lagrange4(xs: &[f64; 4], ys: &[f64; 4], x: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut d = 0.0;
    for i in 0..4 {
        let mut li = 1.0;
        let mut dli = 0.0;
        for j in 0..4 {
            if j == i {
                continue;
            }
            let c = 1.0 / (xs[i] - xs[j]);
            dli = dli * (x - xs[j]) * c + li * c;
            li *= (x - xs[j]) * c;
        }
        v += ys[i] * li;
        d += ys[i] * dli;
    }
    (v, d)
}

impl InterfaceBandTable {
    /// Samples the window spectrum over `[-pi, pi]` and tracks the in-gap branch from `+-2pi/3`.
    pub fn build(operator: StripOperator, gap: (f64, f64), settings: BandSettings) -> Result<Self, BandTableError> {
        let centre = 0.5 * (gap.0 + gap.1);
        let h = 2.0 * PI / settings.samples as f64;
        let kappa: Vec<f64> = (0..=settings.samples).map(|i| -PI + i as f64 * h).collect();
        let solved: Vec<Result<Vec<(f64, Vec<C64>)>, AssemblyError>> = kappa
            .par_iter()
            .map(|&k| {
                let d = operator.assemble(C64::new(k, 0.0));
                let pairs = eigs_near(&d, centre, settings.radius, &settings.lanczos)?;
                Ok(pairs.into_iter().map(|p| (p.lambda, p.vector)).collect())
            })
            .collect();
        let mut pairs = Vec::with_capacity(solved.len());
        for s in solved {
            pairs.push(s?);
        }
        let spectra: Vec<Vec<f64>> = pairs.iter().map(|p| p.iter().map(|x| x.0).collect()).collect();
        let flags = spectra
            .iter()
            .map(|ev| match ev.iter().filter(|&&l| l > gap.0 && l < gap.1).count() {
                0 => Some(SampleFlag::NoInGapMode),
                1 => None,
                c => Some(SampleFlag::MultipleInGapModes(c)),
            })
            .collect();
        let nk = kappa.len();
        let mut lambda = vec![None; nk];
        let mut choice: Vec<Option<usize>> = vec![None; nk];
        let mut ranges = Vec::new();
        let mut seeds = Vec::new();
        for target in [2.0 * PI / 3.0, -2.0 * PI / 3.0] {
            let nearest = ((target + PI) / h).round() as i64;
            // the branch crosses the gap within a few samples of the valley projection
            let reach = (0.1 / h).ceil() as i64;
            let mut order: Vec<usize> = (nearest - reach..=nearest + reach).map(|i| i as usize).collect();
            order.sort_by_key(|&i| (i as i64 - nearest).abs());
            let in_gap_at = |i: usize| -> Vec<usize> {
                (0..spectra[i].len()).filter(|&j| spectra[i][j] > gap.0 && spectra[i][j] < gap.1).collect()
            };
            let Some(&seed) = order.iter().find(|&&i| !in_gap_at(i).is_empty()) else {
                return Err(BandTableError::NoInGapMode { kappa: kappa[nearest as usize] });
            };
            let in_gap = in_gap_at(seed);
            if in_gap.len() > 1 {
                return Err(BandTableError::MultipleInGapModes { kappa: kappa[seed], count: in_gap.len() });
            }
            seeds.push(seed);
            choice[seed] = Some(in_gap[0]);
            lambda[seed] = Some(spectra[seed][in_gap[0]]);
            let mut lo = seed;
            let mut hi = seed;
            for dir in [1i64, -1] {
                let mut prev: Vec<f64> = vec![spectra[seed][in_gap[0]]];
                let mut i = seed as i64;
                loop {
                    let next = i + dir;
                    if next < 0 || next >= nk as i64 {
                        break;
                    }
                    let nu = next as usize;
                    let last = *prev.last().unwrap();
                    let (pred, tol) = if prev.len() >= 2 {
                        let step = last - prev[prev.len() - 2];
                        (last + step, 0.25 * step.abs() + 0.01)
                    } else {
                        (last, 0.5)
                    };
                    let mut dist: Vec<(f64, usize)> =
                        spectra[nu].iter().enumerate().map(|(j, &l)| ((l - pred).abs(), j)).collect();
                    dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                    let Some(&(d0, j0)) = dist.first() else { break };
                    let unique = dist.get(1).map_or(true, |&(d1, _)| d1 > 2.0 * d0 + tol);
                    if d0 > tol || !unique || lambda[nu].is_some() {
                        break;
                    }
                    choice[nu] = Some(j0);
                    lambda[nu] = Some(spectra[nu][j0]);
                    prev.push(spectra[nu][j0]);
                    i = next;
                }
                if dir > 0 {
                    hi = i as usize;
                } else {
                    lo = i as usize;
                }
            }
            ranges.push((lo, hi));
        }

        let mut slope = vec![None; nk];
        for &(lo, hi) in &ranges {
            for i in lo..=hi {
                let f = |j: i64| lambda[(i as i64 + j) as usize].unwrap();
                slope[i] = if i >= lo + 2 && i + 2 <= hi {
                    Some((-f(2) + 8.0 * f(1) - 8.0 * f(-1) + f(-2)) / (12.0 * h))
                } else if i > lo && i < hi {
                    Some((f(1) - f(-1)) / (2.0 * h))
                } else {
                    None
                };
            }
        }

        let (wlo, whi) = (centre - settings.radius, centre + settings.radius);
        let mut d_star_at = vec![None; nk];
        let mut modes = vec![None; nk];
        let mut d_star = f64::INFINITY;
        for i in 0..nk {
            let (Some(l), Some(j)) = (lambda[i], choice[i]) else { continue };
            let mut d = (whi - l).min(l - wlo);
            for (k, &o) in spectra[i].iter().enumerate() {
                if k != j {
                    d = d.min((o - l).abs());
                }
            }
            d_star_at[i] = Some(d);
            if l > gap.0 && l < gap.1 {
                d_star = d_star.min(d);
            }
            let mut u = pairs[i][j].1.clone();
            fix_phase(&operator, &mut u);
            modes[i] = Some(u);
        }

        // well-sloped part of each branch, trimmed by the difference stencil
        let mut i0 = gap;
        for (&(lo, hi), &seed) in ranges.iter().zip(&seeds) {
            let s0 = slope[seed].ok_or(BandTableError::EmptyWindow)?.abs();
            let good = |i: usize| slope[i].is_some_and(|s| s.abs() >= 0.25 * s0) && i >= lo + 2 && i + 2 <= hi;
            let (mut a, mut z) = (seed, seed);
            while a > 0 && good(a - 1) {
                a -= 1;
            }
            while z + 1 < nk && good(z + 1) {
                z += 1;
            }
            let vals: Vec<f64> = (a..=z).map(|i| lambda[i].unwrap()).collect();
            let lmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let lmax = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            i0 = (i0.0.max(lmin), i0.1.min(lmax));
        }
        if i0.0 >= i0.1 {
            return Err(BandTableError::EmptyWindow);
        }
        Ok(InterfaceBandTable {
            operator,
            settings,
            gap,
            centre,
            kappa,
            spectra,
            flags,
            lambda,
            slope,
            modes,
            d_star_at,
            d_star,
            plus: ranges[0],
            minus: ranges[1],
            i0,
        })
    }

    pub fn step(&self) -> f64 {
        self.kappa[1] - self.kappa[0]
    }

    /// Interpolated `lambda^E` and its derivative on the branch containing `kappa`.
    pub fn interpolate(&self, kappa: f64) -> Option<(f64, f64)> {
        let h = self.step();
        let i = ((kappa - self.kappa[0]) / h).floor() as i64;
        for &(lo, hi) in [self.plus, self.minus].iter() {
            let (lo, hi) = (lo as i64, hi as i64);
            if i < lo || i + 1 > hi {
                continue;
            }
            let s = (i - 1).clamp(lo, hi - 3) as usize;
            let xs = [self.kappa[s], self.kappa[s + 1], self.kappa[s + 2], self.kappa[s + 3]];
            let ys = [0, 1, 2, 3].map(|k| self.lambda[s + k].unwrap());
            return Some(lagrange4(&xs, &ys, kappa));
        }
        None
    }

    /// Both roots of `lambda^E(kappa) = lambda` on the interpolated branches.
    pub fn kappa_of_lambda(&self, lambda: f64) -> Result<KappaPair, BandTableError> {
        if !(lambda >= self.i0.0 && lambda <= self.i0.1) {
            return Err(BandTableError::OutsideWindow(lambda));
        }
        let root = |(lo, hi): (usize, usize)| -> Result<(f64, f64), BandTableError> {
            let centre = ((lo + hi) / 2) as i64;
            let mut best: Option<usize> = None;
            for i in lo..hi {
                let (a, b) = (self.lambda[i].unwrap(), self.lambda[i + 1].unwrap());
                if (a - lambda) * (b - lambda) <= 0.0 && best.map_or(true, |j| (i as i64 - centre).abs() < (j as i64 - centre).abs()) {
                    best = Some(i);
                }
            }
            let i = best.ok_or(BandTableError::OutsideWindow(lambda))?;
            let (a, b) = (self.lambda[i].unwrap(), self.lambda[i + 1].unwrap());
            let mut k = self.kappa[i] + self.step() * (lambda - a) / (b - a);
            for _ in 0..50 {
                let (v, d) = self.interpolate(k).ok_or(BandTableError::OutsideWindow(lambda))?;
                let dk = (v - lambda) / d;
                k -= dk;
                if dk.abs() < 1e-14 {
                    break;
                }
            }
            let (_, d) = self.interpolate(k).ok_or(BandTableError::OutsideWindow(lambda))?;
            Ok((k, d))
        };
        let (kp, sp) = root(self.plus)?;
        let (km, sm) = root(self.minus)?;
        Ok(KappaPair { kappa_plus: kp, slope_plus: sp, kappa_minus: km, slope_minus: sm })
    }

    /// Fresh eigensolve at `kappa` for the eigenvalue nearest `guess`.
    pub fn mode_at(&self, kappa: f64, guess: f64) -> Result<InterfaceMode, BandTableError> {
        let d = self.operator.assemble(C64::new(kappa, 0.0));
        // a shift exactly at the eigenvalue would make the factorization singular
        let sigma = guess + 1e-2;
        let pairs = eigs_near(&d, sigma, self.settings.radius, &self.settings.lanczos)?;
        let p = pairs
            .into_iter()
            .min_by(|a, b| (a.lambda - guess).abs().partial_cmp(&(b.lambda - guess).abs()).unwrap())
            .ok_or(BandTableError::NoInGapMode { kappa })?;
        let mut u = p.vector;
        fix_phase(&self.operator, &mut u);
        let slope = self.operator.hellmann_feynman(kappa, p.lambda, &u);
        Ok(InterfaceMode { kappa, lambda: p.lambda, slope, vector: u })
    }

    /// Mode with eigenvalue `lambda` exactly on the discrete branch, by Newton steps in `kappa`.
    pub fn mode_for(&self, kappa_guess: f64, lambda: f64) -> Result<InterfaceMode, BandTableError> {
        let mut m = self.mode_at(kappa_guess, lambda)?;
        for _ in 0..6 {
            if (m.lambda - lambda).abs() < 1e-12 * lambda.abs() {
                break;
            }
            let k = m.kappa - (m.lambda - lambda) / m.slope;
            m = self.mode_at(k, lambda)?;
        }
        Ok(m)
    }

    /// `(u_+, u_-)` at `lambda` in the window.
    pub fn mode_pair(&self, lambda: f64) -> Result<(InterfaceMode, InterfaceMode), BandTableError> {
        let k = self.kappa_of_lambda(lambda)?;
        Ok((self.mode_for(k.kappa_plus, lambda)?, self.mode_for(k.kappa_minus, lambda)?))
    }

    /// Largest `|u^H K u / u^H M u - lambda| / lambda` over the stored modes.
    pub fn rayleigh_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.kappa.len() {
            let (Some(l), Some(u)) = (self.lambda[i], &self.modes[i]) else { continue };
            let d = self.operator.assemble(C64::new(self.kappa[i], 0.0));
            let q = (dot(u, &d.k.apply(u)) / dot(u, &d.m.apply(u))).re;
            worst = worst.max((q - l).abs() / l.abs());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_interpolation_is_exact_on_cubics() {
        let f = |x: f64| 2.0 * x * x * x - x + 0.5;
        let xs = [0.0, 0.3, 0.7, 1.0];
        let ys = xs.map(f);
        let (v, d) = lagrange4(&xs, &ys, 0.45);
        assert!((v - f(0.45)).abs() < 1e-14);
        assert!((d - (6.0 * 0.45 * 0.45 - 1.0)).abs() < 1e-13);
    }
}
