//! The accelerating subsolution built on a self-similar profile, and the time
//! shift that puts the self-similar supersolution above the initial data.

use serde::{Deserialize, Serialize};

use super::{verify_parabolic_residual, ResidualReport, ResidualSample, Sign, SpaceTimeField};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::pde::{Field, Grid};
use crate::profile::{DecayClass, ProfileSolution, SelfSimilarField};

/// Shape constants of the subsolution `w(1 − A w^η)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsolutionSpec {
    pub eta: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    pub delta: f64,
}

impl SubsolutionSpec {
    /// Checks `η > 1`, `rβ/(1+η) < r − ε`, `(A(1+η))^{−1/η} ≤ s0` and
    /// `A(3+3η)δ ≤ ε/2`.
    pub fn new(eta: f64, big_a: f64, delta: f64, p: &ModelParams) -> Result<Self> {
        let s = Self { eta, big_a, delta };
        let mut bad = Vec::new();
        if !(eta > 1.0) {
            bad.push(format!("eta = {eta} must exceed 1"));
        }
        if !(p.r * p.beta / (1.0 + eta) < p.r - p.eps) {
            bad.push(format!("r·beta/(1+eta) = {} must be below r − eps = {}", p.r * p.beta / (1.0 + eta), p.r - p.eps));
        }
        if !(big_a > 0.0 && s.level() <= p.s0) {
            bad.push(format!("(A(1+eta))^(-1/eta) = {} must not exceed s0 = {}", s.level(), p.s0));
        }
        if !(delta > 0.0 && big_a * (3.0 + 3.0 * eta) * delta <= p.eps / 2.0) {
            bad.push(format!("A(3+3eta)delta = {} must not exceed eps/2 = {}", big_a * (3.0 + 3.0 * eta) * delta, p.eps / 2.0));
        }
        if bad.is_empty() {
            Ok(s)
        } else {
            Err(Error::InvalidParams(bad.join("; ")))
        }
    }

    /// The smallest admissible `A` and largest admissible `δ` for
    /// `η = max(2, 2(rβ/(r−ε) − 1))`.
    pub fn for_params(p: &ModelParams) -> Result<Self> {
        let eta = (2.0f64).max(2.0 * (p.r * p.beta / (p.r - p.eps) - 1.0));
        let big_a = p.s0.powf(-eta) / (1.0 + eta);
        let delta = p.eps / (2.0 * big_a * (3.0 + 3.0 * eta));
        Self::new(eta, big_a, delta, p)
    }

    /// Value of `w` at the junction, `(A(1+η))^{−1/η}`.
    pub fn level(&self) -> f64 {
        (self.big_a * (1.0 + self.eta)).powf(-1.0 / self.eta)
    }

    /// `max_w w(1 − A w^η)`, taken left of the junction.
    pub fn plateau(&self) -> f64 {
        self.level() * self.eta / (1.0 + self.eta)
    }
}

/// Plateau left of `X(t)`, `w(1 − A w^η)` right of it, where `w(t, X(t))`
/// equals the junction level.
#[derive(Debug, Clone)]
pub struct Subsolution {
    pub w: SelfSimilarField,
    pub spec: SubsolutionSpec,
    /// Boundary `z1` between the blow-up and far-away zones, in the
    /// self-similar variable.
    pub z1: f64,
}

/// Part of `{x > X(t)}` on which the residual is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Zone {
    /// `X(t) < x < z1 t^σ`.
    BlowUp,
    /// `x ≥ z1 t^σ`, up to the end of the sampled profile.
    FarAway,
}

impl Subsolution {
    /// `profile` must be the matched profile for the reduced rate `r − ε`.
    pub fn new(profile: &ProfileSolution, w: SelfSimilarField, p: &ModelParams, spec: SubsolutionSpec) -> Result<Self> {
        let want = p.r - p.eps;
        if (profile.spec.r_eff - want).abs() > 1e-12 * want {
            return Err(Error::InvalidParams(format!(
                "subsolution needs the profile for r − eps = {want}, got {}",
                profile.spec.r_eff
            )));
        }
        if (profile.spec.m - p.m).abs() > 0.0 || (profile.spec.beta - p.beta).abs() > 0.0 {
            return Err(Error::InvalidParams("profile and model exponents differ".into()));
        }
        Ok(Self { w, spec, z1: profile.inner_end })
    }

    /// Junction `X(t)`.
    pub fn junction(&self, t: f64) -> f64 {
        let pr = &self.w.profile;
        let target = t.powf(pr.a) * self.spec.level();
        // φ is decreasing: bracket in s = z − z0, then bisect in ln s
        let (mut lo, mut hi) = (pr.z0 * 1e-300_f64.max(f64::MIN_POSITIVE), pr.z0.max(1.0));
        while pr.eval(pr.z0 + hi).phi > target {
            hi *= 2.0;
        }
        while pr.eval(pr.z0 + lo).phi < target {
            lo *= 0.5;
        }
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if mid <= lo || mid >= hi {
                break;
            }
            if pr.eval(pr.z0 + mid).phi > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (pr.z0 + (lo * hi).sqrt()) * t.powf(pr.sigma)
    }

    fn shape(&self, w: f64) -> f64 {
        w * (1.0 - self.spec.big_a * w.powf(self.spec.eta))
    }

    /// `|v_x(X⁺)| / |w_x(X)|` from a second-order one-sided quotient; the left
    /// derivative is zero on the plateau.
    pub fn junction_mismatch(&self, t: f64) -> f64 {
        let x = self.junction(t);
        let h = 1e-7 * (x - self.w.front(t));
        let v = |x: f64| self.value(t, x);
        let right = (-3.0 * v(x) + 4.0 * v(x + h) - v(x + 2.0 * h)) / (2.0 * h);
        right.abs() / self.w.eval(t, x).w_x.abs()
    }
}

impl SpaceTimeField for Subsolution {
    fn value(&self, t: f64, x: f64) -> f64 {
        if x <= self.junction(t) {
            self.spec.plateau()
        } else {
            self.shape(self.w.value(t, x))
        }
    }
}

/// Log-spaced residual samples at time `t` in `zone`, with stencils that stay
/// right of the junction.
pub fn residual_samples(sub: &Subsolution, t: f64, zone: Zone, n: usize) -> Vec<ResidualSample> {
    let pr = &sub.w.profile;
    let ts = t.powf(pr.sigma);
    let front = pr.z0 * ts;
    let xj = sub.junction(t);
    let x1 = sub.z1 * ts;
    let (_, z_hi) = pr.z_range();
    let (from, to) = match zone {
        Zone::BlowUp => (xj + 1e-2 * (xj - front), x1),
        // stay clear of the extrapolated tail beyond the last sample
        Zone::FarAway => (x1.max(xj + 1e-2 * (xj - front)), 0.5 * z_hi * ts),
    };
    if !(to > from) || n == 0 {
        return Vec::new();
    }
    (0..n)
        .map(|i| {
            let f = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            // log spacing in the distance to the junction
            let d = (from - xj) * ((to - xj) / (from - xj)).powf(f);
            let x = xj + d;
            let scale = x - front;
            let hx = (2e-3 * scale).min(0.2 * d);
            let ht = 2e-3 * t * (scale / (pr.sigma * x)).min(1.0);
            ResidualSample { t, x, ht, hx }
        })
        .collect()
}

/// First `T = t_start·2^k` for which the sampled residual is nonpositive in
/// both zones at `T`, `√2 T` and `2T`. Returns `T` and the reports at it.
pub fn search_subsolution_time(
    sub: &Subsolution,
    m: f64,
    reaction: &dyn Fn(f64) -> f64,
    t_start: f64,
    samples_per_zone: usize,
    max_doublings: usize,
) -> Result<(f64, Vec<ResidualReport>)> {
    let mut t = t_start;
    for _ in 0..=max_doublings {
        let reports = zone_reports(sub, m, reaction, &[t, t * 2f64.sqrt(), 2.0 * t], samples_per_zone, 0.0)?;
        if reports.iter().all(|r| r.n_samples == 0 || r.worst_value <= 0.0) {
            return Ok((t, reports));
        }
        t *= 2.0;
    }
    Err(Error::Comparison(format!(
        "subsolution residual still positive at t = {} after {max_doublings} doublings",
        t / 2.0
    )))
}

/// Residual reports for both zones over the given times.
pub fn zone_reports(
    sub: &Subsolution,
    m: f64,
    reaction: &dyn Fn(f64) -> f64,
    times: &[f64],
    samples_per_zone: usize,
    tolerance: f64,
) -> Result<Vec<ResidualReport>> {
    [(Zone::BlowUp, "blow-up zone"), (Zone::FarAway, "far-away zone")]
        .iter()
        .map(|&(zone, name)| {
            let samples: Vec<ResidualSample> =
                times.iter().flat_map(|&t| residual_samples(sub, t, zone, samples_per_zone)).collect();
            verify_parabolic_residual(sub, m, reaction, &samples, Sign::NonPositive, tolerance, name)
        })
        .collect()
}

/// Time shift `T` placing `min(1, w(T, ·))` above algebraic initial data
/// `C̄ x^{−α}` (`x ≥ x0`), as the maximum of three closed-form thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionShift {
    /// From `k∞ T^{1/(1−m)} ≥ C̄`.
    pub t_tail: f64,
    /// From `x0 ≤ z̄0 T^σ`.
    pub t_front: f64,
    /// From `T^{−1/(β−1)} min φ ≥ C̄ z̄0^{−2/(1−m)} T^{−σ·2/(1−m)}` on `(z̄0, z̄1]`.
    pub t_middle: f64,
    pub t_shift: f64,
    pub z1: f64,
    pub k_inf: f64,
    pub phi_min: f64,
}

/// Chooses the split point `z̄1` among the profile samples up to `z_cut` so
/// that the resulting shift is smallest.
pub fn supersolution_shift(profile: &ProfileSolution, p: &ModelParams, z_cut: f64) -> Result<SupersolutionShift> {
    let spec = profile.spec;
    let pexp = spec.fast_decay_exp();
    if p.alpha < pexp {
        return Err(Error::Comparison(format!(
            "initial tail exponent alpha = {} is below 2/(1−m) = {pexp}; the shifted profile cannot dominate it",
            p.alpha
        )));
    }
    if profile.decay_class != Some(DecayClass::Fast) {
        return Err(Error::Comparison(format!("profile tail is {:?}, not fast", profile.decay_class)));
    }
    if (spec.r_eff - p.rbar).abs() > 1e-12 * p.rbar {
        return Err(Error::Comparison(format!("supersolution needs the profile for rbar = {}, got {}", p.rbar, spec.r_eff)));
    }
    let z0 = profile.z0;
    let (m, sigma) = (spec.m, spec.sigma());
    let pts: Vec<(f64, f64)> = profile
        .samples
        .iter()
        .filter(|s| s.z > z0 && s.z <= z_cut && s.phi > 0.0)
        .map(|s| (s.z, s.phi))
        .collect();
    if pts.is_empty() {
        return Err(Error::Comparison("no profile samples below the cut".into()));
    }
    // suffix minima of φ z^p give k∞ on [z1, z_cut]
    let mut suffix = vec![f64::INFINITY; pts.len() + 1];
    for i in (0..pts.len()).rev() {
        suffix[i] = suffix[i + 1].min(pts[i].1 * pts[i].0.powf(pexp));
    }
    let t_front = (p.x0 / z0).powf(1.0 / sigma);
    let mut best: Option<SupersolutionShift> = None;
    for (i, &(z1, phi1)) in pts.iter().enumerate() {
        let k = suffix[i];
        if !(k > 0.0 && phi1 > 0.0) {
            continue;
        }
        let t_tail = (p.Cbar / k).powf(1.0 - m);
        let t_middle = (p.Cbar * z0.powf(-pexp) / phi1).powf(1.0 - m);
        let t_shift = t_tail.max(t_front).max(t_middle);
        if best.is_none_or(|b| t_shift < b.t_shift) {
            best = Some(SupersolutionShift { t_tail, t_front, t_middle, t_shift, z1, k_inf: k, phi_min: phi1 });
        }
    }
    best.ok_or_else(|| Error::Comparison("tail lower constant k∞ vanishes on every split point".into()))
}

/// Time `T′` (a snapshot time) and shift `X′ ≥ 0` with
/// `v(t_sub, x + X′) ≤ u(T′, x)` at every node with `x ≤ x_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftCalibration {
    pub t_sub: f64,
    pub t_prime: f64,
    pub x_shift: f64,
}

/// Among the snapshots with `0 < t ≤ t_prime_max`, picks the one needing the
/// smallest shift (bisection to `tol`). Nodes near the truncated right end,
/// where `u` is pinned to zero, must be excluded through `x_max`.
pub fn calibrate_subsolution_shift(
    grid: &Grid,
    snapshots: &[Field],
    sub: &Subsolution,
    t_sub: f64,
    t_prime_max: f64,
    x_max: f64,
    tol: f64,
) -> Option<ShiftCalibration> {
    let below = |s: &Field, dx: f64| {
        grid.nodes
            .iter()
            .zip(&s.values)
            .filter(|(x, _)| **x <= x_max)
            .all(|(&x, &u)| sub.value(t_sub, x + dx) <= u)
    };
    let mut best: Option<ShiftCalibration> = None;
    for s in snapshots.iter().filter(|s| s.t > 0.0 && s.t <= t_prime_max) {
        let mut hi = tol.max(1.0);
        let mut found = false;
        for _ in 0..60 {
            if below(s, hi) {
                found = true;
                break;
            }
            hi *= 2.0;
        }
        if !found {
            continue;
        }
        let mut lo = 0.0;
        if below(s, lo) {
            hi = 0.0;
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if below(s, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if best.is_none_or(|b| hi < b.x_shift) {
            best = Some(ShiftCalibration { t_sub, t_prime: s.t, x_shift: hi });
        }
    }
    best
}
