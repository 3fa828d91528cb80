//! Symmetric coefficient fields `a`, `b` and the interface / bent media built from them.

use crate::geometry::{build_geometry, sqrt3, LatticeGeometry, Vec2};
use crate::symmetry::SymmetryOp;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MediumError {
    #[error("bump radius {radius} must stay below sqrt(3)/6 - l = {limit}")]
    RadiusTooLarge { radius: f64, limit: f64 },
    #[error("coefficient is not uniformly positive (lower bound {lower})")]
    NotUniformlyPositive { lower: f64 },
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum GridCsvError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: non-finite value")]
    NonFinite { row: usize },
    #[error("empty grid")]
    Empty,
}

/// User-facing medium parameters.
///
/// `centre_amp`/`centre_radius` add a radial bump of `a` at the lattice points (the
/// hexagon centres of the honeycomb); it is fixed by every symmetry and leaves `b` alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MediumParams {
    pub a0: f64,
    pub amp_a: f64,
    pub amp_b: f64,
    pub radius: f64,
    pub delta: f64,
    pub clearance: f64,
    pub centre_amp: f64,
    pub centre_radius: f64,
}

impl Default for MediumParams {
    fn default() -> Self {
        MediumParams {
            a0: 1.0,
            amp_a: 50.0,
            amp_b: 80.0,
            radius: 0.23,
            delta: 0.05,
            clearance: 0.05,
            centre_amp: -0.82,
            centre_radius: 0.25,
        }
    }
}

impl MediumParams {
    /// Honeycomb rods only, no centre bump.
    pub fn plain_honeycomb() -> Self {
        MediumParams {
            a0: 1.0,
            amp_a: 8.0,
            amp_b: 4.0,
            radius: 0.2,
            delta: 0.05,
            clearance: 0.05,
            centre_amp: 0.0,
            centre_radius: 0.25,
        }
    }

    /// Homogeneous medium `a = a0`, `b = 0`.
    pub fn constant(a0: f64) -> Self {
        MediumParams { a0, amp_a: 0.0, amp_b: 0.0, centre_amp: 0.0, ..Self::plain_honeycomb() }
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        MediumParams { delta, ..self.clone() }
    }

    pub fn from_toml_str(s: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("medium parameters serialise")
    }
}

/// Validated medium with samplers for every derived coefficient.
#[derive(Debug, Clone)]
pub struct MediumSpec {
    pub params: MediumParams,
    pub geometry: LatticeGeometry,
    pub site_a: Vec2,
    pub site_b: Vec2,
    /// Lower and upper bounds `m^a <= a <= M^a`.
    pub bounds: (f64, f64),
}

pub fn bump_profile(r: f64, r0: f64) -> f64 {
    let q = r / r0;
    if q >= 1.0 {
        return 0.0;
    }
    (1.0 - 1.0 / (1.0 - q * q)).exp()
}

pub fn build_medium(params: &MediumParams) -> Result<MediumSpec, MediumError> {
    let p = params;
    for (name, v) in [
        ("a0", p.a0),
        ("amp_a", p.amp_a),
        ("amp_b", p.amp_b),
        ("radius", p.radius),
        ("delta", p.delta),
        ("clearance", p.clearance),
        ("centre_amp", p.centre_amp),
        ("centre_radius", p.centre_radius),
    ] {
        if !v.is_finite() {
            return Err(MediumError::Invalid(format!("{name} is not finite")));
        }
    }
    if p.radius <= 0.0 || p.centre_radius <= 0.0 || p.clearance <= 0.0 {
        return Err(MediumError::Invalid("radii and clearance must be positive".into()));
    }
    if !(0.0..1.0).contains(&p.delta) {
        return Err(MediumError::Invalid(format!("delta {} outside [0, 1)", p.delta)));
    }
    let limit = sqrt3() / 6.0 - p.clearance;
    if p.radius >= limit {
        return Err(MediumError::RadiusTooLarge { radius: p.radius, limit });
    }
    if p.centre_radius >= 0.5 {
        return Err(MediumError::Invalid("centre radius must be below 1/2".into()));
    }
    let geometry = build_geometry();
    let mut spec = MediumSpec {
        params: p.clone(),
        site_a: geometry.site_a(),
        site_b: geometry.site_b(),
        geometry,
        bounds: (0.0, 0.0),
    };
    let lower = spec.positivity_lower_bound();
    if lower <= 0.0 {
        return Err(MediumError::NotUniformlyPositive { lower });
    }
    spec.bounds = spec.sampled_bounds(96);
    Ok(spec)
}

impl MediumSpec {
    /// Sum of the bump centred at `site` over the 3x3 nearest lattice translates.
    pub fn periodic_bump(&self, x: &Vec2, site: &Vec2, r0: f64) -> f64 {
        let g = &self.geometry;
        let c = g.lattice_coords(&(x - site));
        let c0 = c.map(|v| v - v.round());
        let mut out = 0.0;
        for i in -1..=1 {
            for j in -1..=1 {
                let y = (c0[0] + i as f64) * g.e1 + (c0[1] + j as f64) * g.e2;
                out += bump_profile(y.norm(), r0);
            }
        }
        out
    }

    fn rods(&self, x: &Vec2) -> (f64, f64) {
        let r0 = self.params.radius;
        (self.periodic_bump(x, &self.site_a, r0), self.periodic_bump(x, &self.site_b, r0))
    }

    pub fn a(&self, x: &Vec2) -> f64 {
        let p = &self.params;
        let (ba, bb) = self.rods(x);
        let mut v = p.a0 + p.amp_a * (ba + bb);
        if p.centre_amp != 0.0 {
            v += p.centre_amp * self.periodic_bump(x, &Vec2::zeros(), p.centre_radius);
        }
        v
    }

    pub fn b(&self, x: &Vec2) -> f64 {
        let (ba, bb) = self.rods(x);
        self.params.amp_b * (ba - bb)
    }

    /// Bulk coefficient `a + sign * delta * b`.
    pub fn a_signed(&self, x: &Vec2, sign: f64) -> f64 {
        self.a(x) + sign * self.params.delta * self.b(x)
    }

    /// Straight-interface coefficient: `a + delta b` above `E`, `a - delta b` below.
    pub fn a_interface(&self, x: &Vec2) -> f64 {
        let sign = if x[1] < 0.0 { -1.0 } else { 1.0 };
        self.a_signed(x, sign)
    }

    /// Bent-interface coefficient: `a^E` on the left half-plane, `a^E(R x)` on the right.
    pub fn a_bend(&self, x: &Vec2) -> f64 {
        if self.geometry.in_left(x) {
            self.a_interface(x)
        } else {
            self.a_interface(&SymmetryOp::rotation().apply(x))
        }
    }

    fn positivity_lower_bound(&self) -> f64 {
        let p = &self.params;
        // a +- delta b over a rod is a0 + (amp_a +- delta amp_b) f with 0 <= f <= 1
        let rod = (p.amp_a - p.delta * p.amp_b.abs()).min(0.0);
        let centre = p.centre_amp.min(0.0);
        let rods_meet_centre = p.radius + p.centre_radius > 1.0 / sqrt3();
        if rods_meet_centre {
            p.a0 + rod + centre
        } else {
            p.a0 + rod.min(centre)
        }
    }

    /// Extrema of `a` over a uniform cell grid.
    pub fn sampled_bounds(&self, n: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in self.cell_grid(n) {
            let v = self.a(&x);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Points `(i e1 + j e2) / n` for `0 <= i, j < n`.
    pub fn cell_grid(&self, n: usize) -> Vec<Vec2> {
        let g = &self.geometry;
        let mut pts = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                pts.push((i as f64 / n as f64) * g.e1 + (j as f64 / n as f64) * g.e2);
            }
        }
        pts
    }

    /// Writes `x1, x2, a, b` for the cell grid.
    pub fn write_grid_csv<W: Write>(&self, n: usize, w: W) -> Result<(), csv::Error> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x1", "x2", "a", "b"])?;
        for x in self.cell_grid(n) {
            wr.serialize((x[0], x[1], self.a(&x), self.b(&x)))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// One row of an exported coefficient grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSample {
    pub x1: f64,
    pub x2: f64,
    pub a: f64,
    pub b: f64,
}

pub fn read_grid_csv<R: Read>(r: R) -> Result<Vec<GridSample>, GridCsvError> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (row, rec) in rd.deserialize::<GridSample>().enumerate() {
        let s = rec?;
        if ![s.x1, s.x2, s.a, s.b].iter().all(|v| v.is_finite()) {
            return Err(GridCsvError::NonFinite { row });
        }
        out.push(s);
    }
    if out.is_empty() {
        return Err(GridCsvError::Empty);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::SymmetryTag;

    fn residual(m: &MediumSpec, f: impl Fn(&Vec2) -> f64, op: SymmetryTag, sign: f64) -> f64 {
        let o = SymmetryOp::new(op);
        m.cell_grid(64)
            .iter()
            .map(|x| (f(&o.apply(x)) - sign * f(x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn symmetry_residuals_vanish() {
        for p in [MediumParams::default(), MediumParams::plain_honeycomb()] {
            let m = build_medium(&p).unwrap();
            for op in [SymmetryTag::R, SymmetryTag::F, SymmetryTag::V] {
                assert!(residual(&m, |x| m.a(x), op, 1.0) < 1e-12, "{op:?}");
            }
            for op in [SymmetryTag::R, SymmetryTag::F] {
                assert!(residual(&m, |x| m.b(x), op, 1.0) < 1e-12, "{op:?}");
            }
            assert!(residual(&m, |x| m.b(x), SymmetryTag::V, -1.0) < 1e-12);
        }
    }

    #[test]
    fn b_vanishes_in_clearance_band() {
        let m = build_medium(&MediumParams::plain_honeycomb()).unwrap();
        assert_eq!(m.b(&Vec2::new(0.3, 0.01)), 0.0);
        for i in 0..200 {
            let x = Vec2::new(-3.0 + 0.031 * i as f64, 0.049 * ((i % 7) as f64 / 3.0 - 1.0));
            assert_eq!(m.b(&x), 0.0);
        }
    }

    #[test]
    fn bent_medium_agrees_with_interface_medium_on_the_left() {
        let m = build_medium(&MediumParams::default()).unwrap();
        let x = Vec2::new(-1.0, -0.5);
        assert!(m.geometry.in_left(&x));
        assert_eq!(m.a_bend(&x), m.a_interface(&x));
        let y = Vec2::new(0.7, 0.4);
        let ry = SymmetryOp::rotation().apply(&y);
        assert_eq!(m.a_bend(&y), m.a_interface(&ry));
    }

    #[test]
    fn rejects_radius_crossing_the_clearance_band() {
        let p = MediumParams { radius: 0.25, clearance: 0.05, ..MediumParams::plain_honeycomb() };
        assert!(matches!(build_medium(&p), Err(MediumError::RadiusTooLarge { .. })));
    }

    #[test]
    fn rejects_non_positive_coefficient() {
        let p = MediumParams { amp_a: -1.5, ..MediumParams::plain_honeycomb() };
        assert!(matches!(build_medium(&p), Err(MediumError::NotUniformlyPositive { .. })));
        let p = MediumParams { centre_amp: -1.0, ..MediumParams::default() };
        assert!(matches!(build_medium(&p), Err(MediumError::NotUniformlyPositive { .. })));
    }

    #[test]
    fn bounds_bracket_samples() {
        let m = build_medium(&MediumParams::default()).unwrap();
        let (lo, hi) = m.bounds;
        assert!(lo > 0.0 && hi > lo);
        assert!((lo - (1.0 - 0.82)).abs() < 1e-9);
    }

    #[test]
    fn grid_csv_roundtrip() {
        let m = build_medium(&MediumParams::default()).unwrap();
        let mut buf = Vec::new();
        m.write_grid_csv(8, &mut buf).unwrap();
        let rows = read_grid_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 64);
        let x = Vec2::new(rows[9].x1, rows[9].x2);
        assert_eq!(rows[9].a, m.a(&x));
    }

    #[test]
    fn toml_roundtrip() {
        let p = MediumParams::default();
        let back = MediumParams::from_toml_str(&p.to_toml_string()).unwrap();
        assert_eq!(p, back);
        assert!(MediumParams::from_toml_str("bogus = 1").is_err());
    }
}
