//! Post-processing of trajectories: level sets, tails, residuals of candidate
//! sub/supersolutions, and nodewise comparisons.

mod certificates;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_power_law, PowerFit};
use crate::params::{level_bounds, ModelParams};
use crate::pde::{Field, Grid};
use crate::profile::SelfSimilarField;

pub use certificates::{
    calibrate_subsolution_shift, residual_samples, search_subsolution_time, supersolution_shift, zone_reports, Subsolution, SubsolutionSpec,
    ShiftCalibration, SupersolutionShift, Zone,
};

/// A function of `(t, x)` that can be sampled anywhere in its domain.
pub trait SpaceTimeField {
    fn value(&self, t: f64, x: f64) -> f64;
}

impl SpaceTimeField for SelfSimilarField {
    fn value(&self, t: f64, x: f64) -> f64 {
        SelfSimilarField::value(self, t, x)
    }
}

impl<F: Fn(f64, f64) -> f64> SpaceTimeField for F {
    fn value(&self, t: f64, x: f64) -> f64 {
        self(t, x)
    }
}

/// `min(cap, inner)`.
pub struct Capped<'a> {
    pub inner: &'a dyn SpaceTimeField,
    pub cap: f64,
}

impl SpaceTimeField for Capped<'_> {
    fn value(&self, t: f64, x: f64) -> f64 {
        self.inner.value(t, x).min(self.cap)
    }
}

/// `inner(t + dt, x + dx)`.
pub struct Shifted<'a> {
    pub inner: &'a dyn SpaceTimeField,
    pub dt: f64,
    pub dx: f64,
}

impl SpaceTimeField for Shifted<'_> {
    fn value(&self, t: f64, x: f64) -> f64 {
        self.inner.value(t + self.dt, x + self.dx)
    }
}

/// Rightmost crossings of `u = λ` over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetTrack {
    pub lambda: f64,
    pub times: Vec<f64>,
    /// `None` where the level is not attained (or never left).
    pub positions: Vec<Option<f64>>,
    /// Snapshots with more than one downward crossing.
    pub multiple_crossings: Vec<bool>,
    pub sigma_hat: Option<f64>,
    pub r2: Option<f64>,
    /// Start of the time window used for the fit.
    pub fit_from: f64,
}

impl LevelSetTrack {
    pub fn defined(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().zip(&self.positions).filter_map(|(&t, p)| p.map(|x| (t, x)))
    }
}

/// Rightmost `x` where `values` falls through `lambda`, by linear
/// interpolation, and whether there were several downward crossings.
pub fn rightmost_crossing(grid: &Grid, values: &[f64], lambda: f64) -> (Option<f64>, bool) {
    let x = &grid.nodes;
    let n = values.len().min(x.len());
    let mut found = None;
    let mut count = 0;
    for i in (0..n.saturating_sub(1)).rev() {
        if values[i] >= lambda && values[i + 1] < lambda {
            count += 1;
            if found.is_none() {
                let f = (values[i] - lambda) / (values[i] - values[i + 1]);
                found = Some(x[i] + f * (x[i + 1] - x[i]));
            }
        }
    }
    (found, count > 1)
}

/// Tracks the `λ`-level set over `snapshots` and fits `position ∝ t^σ̂` over
/// the last `fit_decades` decades of tracked times.
pub fn track_level_set(grid: &Grid, snapshots: &[Field], lambda: f64, fit_decades: f64) -> Result<LevelSetTrack> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("level {lambda} outside (0,1)")));
    }
    if snapshots.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Domain("snapshot times must be strictly increasing".into()));
    }
    let mut track = LevelSetTrack {
        lambda,
        times: Vec::new(),
        positions: Vec::new(),
        multiple_crossings: Vec::new(),
        sigma_hat: None,
        r2: None,
        fit_from: f64::NAN,
    };
    for s in snapshots {
        let (p, multi) = rightmost_crossing(grid, &s.values, lambda);
        track.times.push(s.t);
        track.positions.push(p);
        track.multiple_crossings.push(multi);
    }
    if let Some(t_last) = track.defined().map(|(t, _)| t).last() {
        let from = t_last / 10f64.powf(fit_decades);
        let (ts, xs): (Vec<f64>, Vec<f64>) = track.defined().filter(|&(t, x)| t >= from && t > 0.0 && x > 0.0).unzip();
        track.fit_from = from;
        if ts.len() >= 3 {
            let fit = fit_power_law(&ts, &xs)?;
            track.sigma_hat = Some(fit.slope);
            track.r2 = Some(fit.r2);
        }
    }
    Ok(track)
}

/// Blow-up time of `w′ = r w^β`, `w(0) = u0`; infinite for `u0 = 0`.
pub fn ode_blowup_time(u0: f64, r: f64, beta: f64) -> f64 {
    if u0 <= 0.0 || r <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / (r * (beta - 1.0) * u0.powf(beta - 1.0))
    }
}

/// Solution of the kinetic ODE `w′ = r w^β` from `u0`, in closed form.
pub fn w_ode_baseline(u0: f64, r: f64, beta: f64, t: f64) -> Result<f64> {
    if !(u0 >= 0.0 && beta > 1.0 && t >= 0.0) {
        return Err(Error::Domain(format!("w_ode_baseline: u0 = {u0}, beta = {beta}, t = {t}")));
    }
    if u0 == 0.0 {
        return Ok(0.0);
    }
    let tb = ode_blowup_time(u0, r, beta);
    if t >= tb {
        return Err(Error::Domain(format!("t = {t} is at or past the blow-up time {tb}")));
    }
    Ok(u0 / (1.0 - t / tb).powf(1.0 / (beta - 1.0)))
}

/// Log-log fit of `u` against `x` on the nodes inside `window`.
pub fn tail_exponent(grid: &Grid, field: &Field, window: (f64, f64)) -> Result<PowerFit> {
    let (xs, us): (Vec<f64>, Vec<f64>) = grid
        .nodes
        .iter()
        .zip(&field.values)
        .filter(|(x, _)| **x >= window.0 && **x <= window.1)
        .map(|(x, u)| (*x, *u))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::Domain(format!("fewer than two nodes in [{}, {}]", window.0, window.1)));
    }
    if let Some((x, _)) = xs.iter().zip(&us).find(|(_, u)| !(**u > 0.0)) {
        return Err(Error::Domain(format!("u vanishes at x = {x} inside the tail window")));
    }
    fit_power_law(&xs, &us)
}

/// Expected sign of a sampled quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    /// `≤ 0`, e.g. the residual of a subsolution.
    NonPositive,
    /// `≥ 0`, e.g. the residual of a supersolution.
    NonNegative,
}

/// Worst signed value of a sampled inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub region: String,
    pub n_samples: usize,
    /// Largest violation in the direction of the wrong sign (negative when all
    /// samples have the expected sign strictly).
    pub worst_value: f64,
    pub worst_location: (f64, f64),
    /// The same, relative to the size of the terms involved.
    pub worst_relative: f64,
    pub sign_expected: Sign,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    fn new(region: &str, sign: Sign, tolerance: f64) -> Self {
        Self {
            region: region.into(),
            n_samples: 0,
            worst_value: f64::NEG_INFINITY,
            worst_location: (f64::NAN, f64::NAN),
            worst_relative: f64::NEG_INFINITY,
            sign_expected: sign,
            tolerance,
            pass: false,
        }
    }

    fn push(&mut self, t: f64, x: f64, value: f64, scale: f64) {
        let v = match self.sign_expected {
            Sign::NonPositive => value,
            Sign::NonNegative => -value,
        };
        let v = if v.is_nan() { f64::INFINITY } else { v };
        self.n_samples += 1;
        if v > self.worst_value {
            self.worst_value = v;
            self.worst_location = (t, x);
        }
        let rel = if scale > 0.0 { v / scale } else { v };
        self.worst_relative = self.worst_relative.max(rel);
    }

    fn finish(mut self) -> Self {
        self.pass = self.n_samples > 0 && self.worst_value <= self.tolerance;
        self
    }
}

/// One residual sample with its finite-difference steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub t: f64,
    pub x: f64,
    pub ht: f64,
    pub hx: f64,
}

/// Samples `L v = v_t − (v^m)_xx − f(v)` with fourth-order central
/// differences. Errors if a stencil point has a non-finite value.
pub fn verify_parabolic_residual(
    field: &dyn SpaceTimeField,
    m: f64,
    reaction: &dyn Fn(f64) -> f64,
    samples: &[ResidualSample],
    sign: Sign,
    tolerance: f64,
    region: &str,
) -> Result<ResidualReport> {
    let mut rep = ResidualReport::new(region, sign, tolerance);
    for s in samples {
        let v = |t: f64, x: f64| -> Result<f64> {
            let val = field.value(t, x);
            if val.is_finite() {
                Ok(val)
            } else {
                Err(Error::Domain(format!("stencil leaves the domain at (t, x) = ({t}, {x})")))
            }
        };
        let (t, x, ht, hx) = (s.t, s.x, s.ht, s.hx);
        let v0 = v(t, x)?;
        let vt = (-v(t + 2.0 * ht, x)? + 8.0 * v(t + ht, x)? - 8.0 * v(t - ht, x)? + v(t - 2.0 * ht, x)?) / (12.0 * ht);
        let pm = |x: f64| -> Result<f64> { Ok(v(t, x)?.max(0.0).powf(m)) };
        let p0 = v0.max(0.0).powf(m);
        let pxx = (-pm(x + 2.0 * hx)? + 16.0 * pm(x + hx)? - 30.0 * p0 + 16.0 * pm(x - hx)? - pm(x - 2.0 * hx)?)
            / (12.0 * hx * hx);
        let f = reaction(v0);
        rep.push(t, x, vt - pxx - f, vt.abs() + pxx.abs() + f.abs());
    }
    Ok(rep.finish())
}

/// Whether `u` should lie below or above the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Below,
    Above,
}

/// Nodewise ordering of every snapshot against `bound(t, ·)` on the nodes in
/// `window`; the worst value is the largest violation `u − bound` (for
/// `Below`) or `bound − u`.
pub fn compare_fields(
    grid: &Grid,
    snapshots: &[Field],
    bound: &dyn SpaceTimeField,
    direction: Direction,
    window: (f64, f64),
    tolerance: f64,
    region: &str,
) -> ResidualReport {
    // "Below" means u − bound ≤ 0
    let sign = match direction {
        Direction::Below => Sign::NonPositive,
        Direction::Above => Sign::NonNegative,
    };
    let mut rep = ResidualReport::new(region, sign, tolerance);
    for s in snapshots {
        for (&x, &u) in grid.nodes.iter().zip(&s.values) {
            if x < window.0 || x > window.1 {
                continue;
            }
            let b = bound.value(s.t, x);
            rep.push(s.t, x, u - b, u.abs().max(b.abs()));
        }
    }
    rep.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichEntry {
    pub t: f64,
    pub position: f64,
    pub lower: f64,
    pub upper: f64,
    pub inside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub lambda: f64,
    pub t_from: f64,
    pub entries: Vec<SandwichEntry>,
    /// Times at or after `t_from` where the level was not tracked.
    pub missing: Vec<f64>,
    pub pass: bool,
    /// Fitted exponents of the lower bound, upper bound and the track.
    pub exponents: Option<(f64, f64, f64)>,
}

impl SandwichReport {
    pub fn failures(&self) -> impl Iterator<Item = &SandwichEntry> {
        self.entries.iter().filter(|e| !e.inside)
    }
}

/// Checks `x⁻(t) < position < x⁺(t)` at every tracked time `t ≥ t_from`.
pub fn check_sandwich(
    track: &LevelSetTrack,
    params: &ModelParams,
    z_star: f64,
    z0bar: Option<f64>,
    t_from: f64,
) -> Result<SandwichReport> {
    let mut entries = Vec::new();
    let mut missing = Vec::new();
    for (&t, p) in track.times.iter().zip(&track.positions) {
        if t < t_from {
            continue;
        }
        let Some(x) = *p else {
            missing.push(t);
            continue;
        };
        let (lower, upper) = level_bounds(params, t, z_star, z0bar)?;
        entries.push(SandwichEntry { t, position: x, lower, upper, inside: lower < x && x < upper });
    }
    let exponents = if entries.len() >= 3 {
        let ts: Vec<f64> = entries.iter().map(|e| e.t).collect();
        let lo: Vec<f64> = entries.iter().map(|e| e.lower).collect();
        let hi: Vec<f64> = entries.iter().map(|e| e.upper).collect();
        let xs: Vec<f64> = entries.iter().map(|e| e.position).collect();
        Some((fit_power_law(&ts, &lo)?.slope, fit_power_law(&ts, &hi)?.slope, fit_power_law(&ts, &xs)?.slope))
    } else {
        None
    };
    let pass = !entries.is_empty() && missing.is_empty() && entries.iter().all(|e| e.inside);
    Ok(SandwichReport { lambda: track.lambda, t_from, entries, missing, pass, exponents })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ode_baseline_examples() {
        assert!((w_ode_baseline(0.5, 1.0, 2.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(w_ode_baseline(0.0, 1.0, 1.2, 1e9).unwrap(), 0.0);
        assert!((ode_blowup_time(0.5, 1.0, 2.0) - 2.0).abs() < 1e-15);
        assert!(w_ode_baseline(0.5, 1.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn rightmost_crossing_interpolates() {
        let g = Grid::new(vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let (x, multi) = rightmost_crossing(&g, &[1.0, 0.2, 0.8, 0.4, 0.0], 0.5);
        assert!((x.unwrap() - 2.75).abs() < 1e-15);
        assert!(multi);
        assert_eq!(rightmost_crossing(&g, &[0.4; 5], 0.5).0, None);
    }

    #[test]
    fn tail_exponent_rejects_zeros() {
        let g = Grid::new(vec![1.0, 2.0, 3.0]).unwrap();
        let f = Field { t: 1.0, values: vec![1.0, 0.0, 0.1] };
        assert!(tail_exponent(&g, &f, (1.0, 3.0)).is_err());
    }
}
