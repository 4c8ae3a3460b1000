//! Blow-up shooting, decay classification and matching of the blow-up point.
//!
//! Near the blow-up point the profile equation has a fast mode with rate
//! `≈ σ z φ^{1−m}/m`, which grows without bound as `z ↓ z0`. Integrating
//! toward `z0` is therefore hopeless beyond a thin layer, while integrating
//! away from it is stiff but stable: every admissible anchor slope relaxes onto
//! the same slow manifold. Shooting therefore starts from a deep anchor on the
//! leading-order barrier and marches outward with an L-stable implicit method.

use serde::{Deserialize, Serialize};

use super::{blowup_seed, c0_constant, kappa, Anchor, ProfileOdeSpec, ProfileSolution, ProfileState, ShootingConfig};
use crate::error::{Error, Result};
use crate::fit::{fit_power_law, PowerFit};
use crate::ode::{radau5, Status, StepLimits, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayClass {
    /// `φ ~ z^{−2/(1−m)}`: diffusion-dominated tail.
    Fast,
    /// `φ ~ z^{−2/(β−m)}`: transport-dominated tail.
    Slow,
    CrossedZero,
    /// `φ′` reached zero; a positive minimum is impossible for true
    /// solutions, so the trajectory is on its way up.
    BlewUp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Reached,
    CrossedZero,
    BlewUp,
    StepCollapse,
    NonFinite,
    MaxSteps,
}

impl Termination {
    fn is_failure(self) -> bool {
        matches!(self, Self::StepCollapse | Self::NonFinite | Self::MaxSteps)
    }
}

struct March {
    termination: Termination,
    s: f64,
    y: [f64; 2],
    samples: Vec<ProfileState>,
}

/// Integrates the `(v, q)` system in the offset variable `s = z − base`
/// from `s_start` to `s_end`, stopping on zero crossing, on `φ′ ≥ 0`, or when
/// `check` returns `false`.
#[allow(clippy::too_many_arguments)]
fn march<C>(
    spec: &ProfileOdeSpec,
    base: f64,
    s_start: f64,
    y0: [f64; 2],
    s_end: f64,
    cfg: &ShootingConfig,
    record: bool,
    mut check: C,
) -> March
where
    C: FnMut(f64, f64, &[f64; 2]) -> bool,
{
    let mut samples = Vec::new();
    let push = |samples: &mut Vec<ProfileState>, s: f64, y: &[f64; 2]| {
        samples.push(ProfileState { z: base + s, phi: spec.phi_of_v(y[0]), q: y[1] });
    };
    if record {
        push(&mut samples, s_start, &y0);
    }
    if y0[1] >= 0.0 {
        return March { termination: Termination::BlewUp, s: s_start, y: y0, samples };
    }
    let v_floor = cfg.phi_floor.powf(spec.m);
    let mut event = None;
    let tol = Tolerance { rtol: cfg.tol_ode, atol: 1e-300 };
    let limits = StepLimits { h_init: cfg.max_step_rel * s_start * 1e-2, ..StepLimits::default() };
    let out = radau5(
        |s, y| spec.rhs(base + s, y),
        |s, y| spec.jac(base + s, y),
        s_start,
        y0,
        s_end,
        tol,
        limits,
        |s| cfg.max_step_rel * s,
        |s, y| {
            let z = base + s;
            if record {
                push(&mut samples, s, y);
            }
            if y[0] <= v_floor || (y[1] < 0.0 && -y[0] / y[1] < 1e-6 * s) {
                event = Some(Termination::CrossedZero);
                return false;
            }
            if y[1] >= 0.0 {
                event = Some(Termination::BlewUp);
                return false;
            }
            check(s, z, y)
        },
    );
    let termination = match out.status {
        Status::Finished => Termination::Reached,
        Status::Stopped => event.unwrap_or(Termination::Reached),
        Status::StepCollapse => Termination::StepCollapse,
        Status::NonFinite => Termination::NonFinite,
        Status::MaxSteps => Termination::MaxSteps,
    };
    March { termination, s: out.t, y: out.y, samples }
}

fn state_from(spec: &ProfileOdeSpec, phi: f64, dphi: f64) -> [f64; 2] {
    [phi.powf(spec.m), spec.m * phi.powf(spec.m - 1.0) * dphi]
}

/// Integrates the profile equation outward from an arbitrary seed
/// `(z, φ, φ′)` up to `cfg.z_max · z`, a zero crossing, or `φ′ ≥ 0`.
pub fn integrate_profile(spec: &ProfileOdeSpec, seed: Anchor, cfg: &ShootingConfig) -> Result<ProfileSolution> {
    if !(seed.phi > 0.0 && seed.z > 0.0) {
        return Err(Error::Domain(format!("seed needs φ > 0 and z > 0, got {seed:?}")));
    }
    let y0 = state_from(spec, seed.phi, seed.dphi);
    let run = march(spec, 0.0, seed.z, y0, cfg.z_max * seed.z, cfg, true, |_, _, _| true);
    if run.termination.is_failure() {
        return Err(Error::Integration {
            z: run.s,
            reason: format!("{:?} with state (v, q) = {:?}", run.termination, run.y),
        });
    }
    let mut sol = ProfileSolution {
        spec: *spec,
        z0: 0.0,
        anchor: seed,
        samples: run.samples,
        c_blow_fit: None,
        blow_exp_fit: None,
        decay_class: None,
        c_decay_fit: None,
        decay_slope_fit: None,
        k0: f64::NAN,
        big_k0: f64::NAN,
        inner_end: seed.z,
        z_ref: seed.z,
        termination: run.termination,
    };
    annotate_decay(&mut sol, cfg);
    Ok(sol)
}

fn annotate_decay(sol: &mut ProfileSolution, cfg: &ShootingConfig) {
    match classify_decay(sol, cfg) {
        Ok((class, fit)) => {
            sol.decay_class = Some(class);
            sol.c_decay_fit = fit.map(|f| f.prefactor);
            sol.decay_slope_fit = fit.map(|f| f.slope);
        }
        Err(_) => {
            sol.decay_class = match sol.termination {
                Termination::CrossedZero => Some(DecayClass::CrossedZero),
                Termination::BlewUp => Some(DecayClass::BlewUp),
                _ => None,
            };
        }
    }
}

/// Classifies the far-field behavior on `cfg.tail_fit_window` (decades above
/// `sol.z_ref`) by the nearest of the two candidate decay exponents.
pub fn classify_decay(sol: &ProfileSolution, cfg: &ShootingConfig) -> Result<(DecayClass, Option<PowerFit>)> {
    let (d1, d2) = cfg.tail_fit_window;
    if !(d2 - d1 >= 1.0) {
        return Err(Error::Refused(format!("tail window ({d1}, {d2}) spans less than one decade")));
    }
    let zl = sol.z_ref * 10f64.powf(d1);
    let zr = sol.z_ref * 10f64.powf(d2);
    let z_end = sol.z_end();
    if z_end < zr * (1.0 - 1e-12) {
        return match sol.termination {
            Termination::CrossedZero => Ok((DecayClass::CrossedZero, None)),
            Termination::BlewUp => Ok((DecayClass::BlewUp, None)),
            Termination::Reached => Err(Error::Refused(format!(
                "profile ends at z = {z_end} before the tail window end {zr}"
            ))),
            t => Err(Error::Integration { z: z_end, reason: format!("{t:?} before tail window") }),
        };
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = sol
        .samples
        .iter()
        .filter(|p| p.z >= zl && p.z <= zr)
        .map(|p| (p.z, p.phi))
        .unzip();
    if xs.len() < 8 {
        return Err(Error::Refused(format!("only {} samples in tail window", xs.len())));
    }
    let fit = fit_power_law(&xs, &ys)?;
    let class = nearest_exponent(&sol.spec, fit.slope)?;
    Ok((class, Some(fit)))
}

fn nearest_exponent(spec: &ProfileOdeSpec, slope: f64) -> Result<DecayClass> {
    let df = (slope + spec.fast_decay_exp()).abs();
    let ds = (slope + spec.slow_decay_exp()).abs();
    if (df - ds).abs() <= 1e-9 * (df + ds) {
        return Err(Error::Ambiguous(format!("slope {slope} equidistant from both decay exponents")));
    }
    Ok(if df < ds { DecayClass::Fast } else { DecayClass::Slow })
}

/// Verdict of an inner run for a given anchor slope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InnerVerdict {
    /// Dropped below the guard `(z−z0)^{−γ1}` or reached zero.
    Below,
    /// Rose above the band ceiling `K0 (z−z0)^{−1/(β−1)}` or turned upward.
    Above,
    Inside,
}

struct InnerGeometry {
    s_anchor: f64,
    s_inner: f64,
    c0: f64,
    k0: f64,
    big_k0: f64,
    gamma1: f64,
    anchor: Anchor,
}

fn inner_geometry(spec: &ProfileOdeSpec, z0: f64, cfg: &ShootingConfig) -> Result<InnerGeometry> {
    cfg.validate(spec.m)?;
    if !(z0 > 0.0 && z0.is_finite()) {
        return Err(Error::Domain(format!("blow-up point z0 = {z0} must be positive")));
    }
    let s_inner = cfg.delta0.min(kappa(spec, cfg.gamma_band)) * z0;
    let s_anchor = s_inner * 10f64.powf(-cfg.inner_decades);
    let c0 = c0_constant(spec, z0);
    let anchor = blowup_seed(spec, z0, c0, s_anchor, cfg.gamma_band)?;
    Ok(InnerGeometry {
        s_anchor,
        s_inner,
        c0,
        k0: c0 / cfg.gamma_band,
        big_k0: c0 * cfg.gamma_band,
        gamma1: cfg.gamma1_for(spec.m),
        anchor,
    })
}

fn inner_verdict(spec: &ProfileOdeSpec, z0: f64, g: &InnerGeometry, xi: f64, cfg: &ShootingConfig) -> InnerVerdict {
    let a = spec.a();
    let y0 = state_from(spec, g.anchor.phi, -xi);
    let mut verdict = InnerVerdict::Inside;
    let run = march(spec, z0, g.s_anchor, y0, g.s_inner, cfg, false, |s, _, y| {
        let phi = spec.phi_of_v(y[0]);
        if phi > g.big_k0 * s.powf(-a) {
            verdict = InnerVerdict::Above;
            return false;
        }
        if phi < s.powf(-g.gamma1) {
            verdict = InnerVerdict::Below;
            return false;
        }
        true
    });
    match run.termination {
        Termination::Reached => verdict,
        Termination::CrossedZero => InnerVerdict::Below,
        Termination::BlewUp => InnerVerdict::Above,
        _ if verdict != InnerVerdict::Inside => verdict,
        _ => {
            // a failed transient: side decided by where it was heading
            if spec.phi_of_v(run.y[0]) > g.c0 * run.s.powf(-a) {
                InnerVerdict::Above
            } else {
                InnerVerdict::Below
            }
        }
    }
}

/// Admissible anchor slopes `ξ = −φ′(anchor)` for which the outward inner
/// run stays between the guard and the band ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeBracket {
    /// Leading-order slope of the barrier `C0 (z−z0)^{−1/(β−1)}`.
    pub xi_seed: f64,
    /// Largest slope found to end up above the band (lower edge).
    pub xi_above: f64,
    /// Smallest slope found to end up below the guard (upper edge).
    pub xi_below: f64,
    pub runs: usize,
}

/// Brackets the admissible anchor slopes by doubling outward from the
/// leading-order slope and then bisecting each edge to relative width `1e−6`.
pub fn inner_slope_bracket(spec: &ProfileOdeSpec, z0: f64, cfg: &ShootingConfig) -> Result<SlopeBracket> {
    let g = inner_geometry(spec, z0, cfg)?;
    slope_bracket_with(spec, z0, &g, cfg)
}

fn slope_bracket_with(spec: &ProfileOdeSpec, z0: f64, g: &InnerGeometry, cfg: &ShootingConfig) -> Result<SlopeBracket> {
    let xi_seed = -g.anchor.dphi;
    let mut runs = 0;
    let mut verdict = |xi: f64| {
        runs += 1;
        inner_verdict(spec, z0, g, xi, cfg)
    };
    let v_seed = verdict(xi_seed);
    if v_seed != InnerVerdict::Inside {
        return Err(Error::SlopeBracket(format!(
            "leading-order slope {xi_seed} at z0 = {z0} is not admissible ({v_seed:?})"
        )));
    }
    // Lower edge: ξ = 0 means φ′ = 0 at the anchor, which is never admissible.
    let (mut lo, mut hi) = (0.0, xi_seed);
    let v0 = verdict(0.0);
    if v0 != InnerVerdict::Above {
        return Err(Error::SlopeBracket(format!("flat anchor slope gives {v0:?}, expected Above")));
    }
    while hi - lo > 1e-6 * xi_seed {
        let mid = 0.5 * (lo + hi);
        match verdict(mid) {
            InnerVerdict::Above => lo = mid,
            InnerVerdict::Inside => hi = mid,
            InnerVerdict::Below => {
                return Err(Error::SlopeBracket(format!("non-monotone verdicts below the seed slope at ξ = {mid}")))
            }
        }
    }
    let xi_above = lo;

    // Upper edge: double until the run drops below the guard.
    let mut inside = xi_seed;
    let mut below = None;
    for k in 1..=200 {
        let xi = xi_seed * 2f64.powi(k);
        match verdict(xi) {
            InnerVerdict::Below => {
                below = Some(xi);
                break;
            }
            InnerVerdict::Inside => inside = xi,
            InnerVerdict::Above => {
                return Err(Error::SlopeBracket(format!("steep slope ξ = {xi} ends above the band")))
            }
        }
    }
    let Some(mut below) = below else {
        return Err(Error::SlopeBracket(format!(
            "no slope up to {} drops below the guard (Above edge {xi_above})",
            inside
        )));
    };
    while below - inside > 1e-6 * below {
        let mid = 0.5 * (inside + below);
        match verdict(mid) {
            InnerVerdict::Below => below = mid,
            _ => inside = mid,
        }
    }
    Ok(SlopeBracket { xi_seed, xi_above, xi_below: below, runs })
}

/// Builds the decreasing profile blowing up at `z0`.
///
/// The anchor sits at `z0 + s_a`, `s_a = δ·10^{−inner_decades}` with
/// `δ = min(delta0, κ)·z0`, on the leading-order barrier `C0 s^{−1/(β−1)}`.
/// The admissible slope interval is bracketed (see [`inner_slope_bracket`]);
/// the leading-order slope, which lies inside it, is used to continue the
/// profile to `z_max·z0`.
pub fn shoot_inner(spec: &ProfileOdeSpec, z0: f64, cfg: &ShootingConfig) -> Result<(ProfileSolution, SlopeBracket)> {
    let g = inner_geometry(spec, z0, cfg)?;
    let bracket = slope_bracket_with(spec, z0, &g, cfg)?;
    let sol = continue_from_anchor(spec, z0, &g, cfg)?;
    Ok((sol, bracket))
}

fn shoot_fast(spec: &ProfileOdeSpec, z0: f64, cfg: &ShootingConfig) -> Result<ProfileSolution> {
    let g = inner_geometry(spec, z0, cfg)?;
    continue_from_anchor(spec, z0, &g, cfg)
}

fn continue_from_anchor(spec: &ProfileOdeSpec, z0: f64, g: &InnerGeometry, cfg: &ShootingConfig) -> Result<ProfileSolution> {
    let y0 = state_from(spec, g.anchor.phi, g.anchor.dphi);
    let s_end = cfg.z_max * z0 - z0;
    let run = march(spec, z0, g.s_anchor, y0, s_end, cfg, true, |_, _, _| true);
    if run.termination.is_failure() {
        return Err(Error::Integration {
            z: z0 + run.s,
            reason: format!("{:?} while continuing the blow-up profile", run.termination),
        });
    }
    let inner_end = z0 + g.s_inner;
    let (xs, ys): (Vec<f64>, Vec<f64>) = run
        .samples
        .iter()
        .filter(|p| p.z <= inner_end)
        .map(|p| (p.z - z0, p.phi))
        .unzip();
    let blow = fit_power_law(&xs, &ys).ok();
    let mut sol = ProfileSolution {
        spec: *spec,
        z0,
        anchor: g.anchor,
        samples: run.samples,
        c_blow_fit: blow.map(|f| f.prefactor),
        blow_exp_fit: blow.map(|f| -f.slope),
        decay_class: None,
        c_decay_fit: None,
        decay_slope_fit: None,
        k0: g.k0,
        big_k0: g.big_k0,
        inner_end,
        z_ref: z0,
        termination: run.termination,
    };
    annotate_decay(&mut sol, cfg);
    Ok(sol)
}

/// Side of the matching point a trajectory lies on, judged at the far end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Crossed zero, or still decays like the fast tail at `z_max`.
    Low,
    /// Turned to the slow tail (or upward).
    High,
}

fn far_side(sol: &ProfileSolution) -> Result<Side> {
    match sol.termination {
        Termination::CrossedZero => return Ok(Side::Low),
        Termination::BlewUp => return Ok(Side::High),
        Termination::Reached => {}
        t => return Err(Error::Integration { z: sol.z_end(), reason: format!("{t:?}") }),
    }
    let z_end = sol.z_end();
    let (xs, ys): (Vec<f64>, Vec<f64>) = sol
        .samples
        .iter()
        .filter(|p| p.z >= 0.1 * z_end)
        .map(|p| (p.z, p.phi))
        .unzip();
    let fit = fit_power_law(&xs, &ys)?;
    Ok(match nearest_exponent(&sol.spec, fit.slope)? {
        DecayClass::Fast => Side::Low,
        _ => Side::High,
    })
}

fn side_with_retry(spec: &ProfileOdeSpec, z0: f64, cfg: &ShootingConfig) -> Result<Side> {
    let sol = shoot_fast(spec, z0, cfg)?;
    match far_side(&sol) {
        Err(Error::Ambiguous(_)) => {
            let wider = ShootingConfig { z_max: 2.0 * cfg.z_max, ..*cfg };
            far_side(&shoot_fast(spec, z0, &wider)?)
        }
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub z_star: f64,
    pub z_low: f64,
    pub z_high: f64,
    pub iterations: usize,
    /// The low-side profile, whose tail decays fast on the fit window.
    pub solution: ProfileSolution,
    pub slope_bracket: SlopeBracket,
}

/// Locates the blow-up point `z*` separating profiles that cross zero (or
/// decay fast) from profiles that decay slowly, by bisection.
///
/// Each bisection step is judged at the far end of the integration range, where
/// the two behaviors have separated the most. The returned profile is the
/// low-side one; its tail fit on the configured window gives `C_decay_fit`.
pub fn match_z_star(spec: &ProfileOdeSpec, bracket: (f64, f64), cfg: &ShootingConfig) -> Result<MatchResult> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Bracket(format!("need 0 < zLow < zHigh, got ({lo}, {hi})")));
    }
    let sol_lo = shoot_fast(spec, lo, cfg)?;
    let sol_hi = shoot_fast(spec, hi, cfg)?;
    let c_lo = sol_lo.decay_class;
    let c_hi = sol_hi.decay_class;
    if !matches!(c_lo, Some(DecayClass::Fast | DecayClass::CrossedZero)) || c_hi != Some(DecayClass::Slow) {
        return Err(Error::Bracket(format!(
            "zLow = {lo} classified {c_lo:?}, zHigh = {hi} classified {c_hi:?}"
        )));
    }
    let (s_lo, s_hi) = (side_with_retry(spec, lo, cfg)?, side_with_retry(spec, hi, cfg)?);
    if s_lo != Side::Low || s_hi != Side::High {
        return Err(Error::Bracket(format!("far-field sides: zLow {s_lo:?}, zHigh {s_hi:?}")));
    }
    let mut iterations = 0;
    while hi - lo > cfg.tol_bisect {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match side_with_retry(spec, mid, cfg)? {
            Side::Low => lo = mid,
            Side::High => hi = mid,
        }
        iterations += 1;
    }
    let (solution, slope_bracket) = shoot_inner(spec, lo, cfg)?;
    Ok(MatchResult { z_star: 0.5 * (lo + hi), z_low: lo, z_high: hi, iterations, solution, slope_bracket })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub z0: f64,
    pub class: Option<DecayClass>,
    pub side: Option<Side>,
    pub error: Option<String>,
}

/// Classifies the profiles blowing up at `z0 = 2^k`, `k ∈ k_range`, and
/// returns the table together with the first Low→High bracket, if any.
pub fn coarse_scan(
    spec: &ProfileOdeSpec,
    k_range: std::ops::RangeInclusive<i32>,
    cfg: &ShootingConfig,
) -> (Vec<ScanEntry>, Option<(f64, f64)>) {
    let mut table = Vec::new();
    for k in k_range {
        let z0 = 2f64.powi(k);
        let entry = match shoot_fast(spec, z0, cfg) {
            Ok(sol) => ScanEntry {
                z0,
                class: sol.decay_class,
                side: far_side(&sol).ok(),
                error: None,
            },
            Err(e) => ScanEntry { z0, class: None, side: None, error: Some(e.to_string()) },
        };
        table.push(entry);
    }
    let bracket = table.windows(2).find_map(|w| {
        (w[0].side == Some(Side::Low) && w[1].side == Some(Side::High)).then_some((w[0].z0, w[1].z0))
    });
    (table, bracket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::c_infinity;

    fn reference() -> ProfileOdeSpec {
        ProfileOdeSpec::new(0.5, 1.2, 1.0).unwrap()
    }

    #[test]
    fn flat_seed_stops_immediately() {
        let spec = reference();
        let seed = Anchor { z: 1.0, phi: 0.5, dphi: 0.0 };
        let sol = integrate_profile(&spec, seed, &ShootingConfig::default()).unwrap();
        assert_eq!(sol.termination, Termination::BlewUp);
        assert_eq!(sol.samples.len(), 1);
    }

    #[test]
    fn steep_seed_crosses_zero() {
        let spec = reference();
        let seed = Anchor { z: 1.0, phi: 0.5, dphi: -1e3 };
        let sol = integrate_profile(&spec, seed, &ShootingConfig::default()).unwrap();
        assert_eq!(sol.termination, Termination::CrossedZero);
        assert_eq!(sol.decay_class, Some(DecayClass::CrossedZero));
    }

    #[test]
    fn synthetic_slow_tail_is_slow() {
        let spec = reference();
        let k = spec.slow_decay_exp();
        let samples: Vec<ProfileState> = (0..200)
            .map(|i| {
                let z = 10f64.powf(i as f64 * 0.03);
                ProfileState { z, phi: 3.0 * z.powf(-k), q: -1.0 }
            })
            .collect();
        let sol = ProfileSolution {
            spec,
            z0: 0.0,
            anchor: Anchor { z: 1.0, phi: 3.0, dphi: -3.0 * k },
            samples,
            c_blow_fit: None,
            blow_exp_fit: None,
            decay_class: None,
            c_decay_fit: None,
            decay_slope_fit: None,
            k0: f64::NAN,
            big_k0: f64::NAN,
            inner_end: 1.0,
            z_ref: 1.0,
            termination: Termination::Reached,
        };
        let (class, fit) = classify_decay(&sol, &ShootingConfig::default()).unwrap();
        assert_eq!(class, DecayClass::Slow);
        assert!((fit.unwrap().slope + 2.0 / 0.7).abs() < 1e-9);

        let narrow = ShootingConfig { tail_fit_window: (2.0, 2.5), ..ShootingConfig::default() };
        assert!(matches!(classify_decay(&sol, &narrow), Err(Error::Refused(_))));
    }

    #[test]
    fn tail_seed_is_fast() {
        let spec = ProfileOdeSpec::without_reaction(0.5, 1.2).unwrap();
        let c = c_infinity(0.5);
        let (p, d, _) = crate::profile::barriers::tail(&spec, c, 10.0);
        let cfg = ShootingConfig { z_max: 1e3, tail_fit_window: (0.0, 2.0), ..ShootingConfig::default() };
        let sol = integrate_profile(&spec, Anchor { z: 10.0, phi: p, dphi: d }, &cfg).unwrap();
        assert_eq!(sol.decay_class, Some(DecayClass::Fast));
        assert!((sol.decay_slope_fit.unwrap() + 4.0).abs() < 0.05);
    }

    #[test]
    fn inner_bracket_contains_seed() {
        let spec = reference();
        let b = inner_slope_bracket(&spec, 1.0, &ShootingConfig::default()).unwrap();
        assert!(b.xi_above < b.xi_seed && b.xi_seed < b.xi_below, "{b:?}");
    }
}
