//! End-to-end steps shared by the command-line driver and the acceptance
//! tests: profile matching, PDE runs, level-set tracks and the certificate
//! suite.

use serde::{Deserialize, Serialize};

use crate::analysis::{
    calibrate_subsolution_shift, check_sandwich, compare_fields, search_subsolution_time, supersolution_shift,
    track_level_set, zone_reports, Capped, Direction, LevelSetTrack, ResidualReport, SandwichReport, ShiftCalibration,
    Shifted, Subsolution, SubsolutionSpec, SupersolutionShift,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::params::{classify_regime, ModelParams};
use crate::pde::{make_initial_data, run, Field, Grid, Trajectory};
use crate::profile::{
    coarse_scan, match_z_star, verify_profile_estimates, EstimateBundle, ProfileEvaluator, ProfileOdeSpec,
    ProfileSolution, ScanEntry, SelfSimilarField, ShootingConfig,
};

/// Which reaction rate a profile is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rate {
    /// The lower rate `r`.
    Lower,
    /// `r − ε`, used by the subsolution.
    Reduced,
    /// The upper rate `r̄`, used by the supersolution.
    Upper,
}

impl Rate {
    pub fn value(self, p: &ModelParams) -> f64 {
        match self {
            Self::Lower => p.r,
            Self::Reduced => p.r - p.eps,
            Self::Upper => p.rbar,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Lower => "lower",
            Self::Reduced => "reduced",
            Self::Upper => "upper",
        }
    }
}

/// A matched profile with its bracket, scan table and estimate checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRun {
    pub r_eff: f64,
    pub z_star: f64,
    pub z_low: f64,
    pub z_high: f64,
    pub iterations: usize,
    pub scan: Vec<ScanEntry>,
    pub estimates: EstimateBundle,
    pub solution: ProfileSolution,
}

impl ProfileRun {
    pub fn width(&self) -> f64 {
        self.z_high - self.z_low
    }
}

/// Plain-text rendering of a coarse scan.
pub fn scan_table(scan: &[ScanEntry]) -> String {
    let mut s = format!("{:>14}  {:<12} {:<6} error\n", "z0", "class", "side");
    for e in scan {
        let class = e.class.map(|c| format!("{c:?}")).unwrap_or_else(|| "-".into());
        let side = e.side.map(|c| format!("{c:?}")).unwrap_or_else(|| "-".into());
        s.push_str(&format!("{:>14.6e}  {:<12} {:<6} {}\n", e.z0, class, side, e.error.as_deref().unwrap_or("")));
    }
    s
}

/// Scans, matches and checks the profile for reaction rate `r_eff`.
///
/// A missing bracket is reported as [`Error::Bracket`] carrying the scan table.
pub fn compute_profile(model: &ModelParams, r_eff: f64, shooting: &ShootingConfig, k_range: (i32, i32)) -> Result<ProfileRun> {
    if !(r_eff > 0.0) {
        return Err(Error::InvalidParams(format!(
            "profile needs a positive reaction rate, got {r_eff}; the reaction-free equation has no blow-up profile"
        )));
    }
    let spec = ProfileOdeSpec::new(model.m, model.beta, r_eff)?;
    shooting.validate(model.m)?;
    let (scan, bracket) = coarse_scan(&spec, k_range.0..=k_range.1, shooting);
    let Some(bracket) = bracket else {
        return Err(Error::Bracket(format!("no Low→High change in the coarse scan\n{}", scan_table(&scan))));
    };
    let mr = match_z_star(&spec, bracket, shooting)?;
    let estimates = verify_profile_estimates(&mr.solution, shooting);
    Ok(ProfileRun {
        r_eff,
        z_star: mr.z_star,
        z_low: mr.z_low,
        z_high: mr.z_high,
        iterations: mr.iterations,
        scan,
        estimates,
        solution: mr.solution,
    })
}

/// The self-similar field of a matched profile, extrapolated beyond
/// `z_ref·10^cut_decades`.
pub fn profile_field(sol: &ProfileSolution, cut_decades: f64) -> Result<SelfSimilarField> {
    Ok(SelfSimilarField::new(ProfileEvaluator::new(sol, Some(sol.z_ref * 10f64.powf(cut_decades)))?))
}

/// The right end must stay beyond ten times the predicted front at the final time.
pub fn check_domain(cfg: &RunConfig, z_star_upper: f64) -> Result<()> {
    let need = 10.0 * z_star_upper * cfg.time.t_end.powf(cfg.model.sigma());
    if cfg.grid.x_right < need {
        return Err(Error::Config {
            path: "grid.x_right".into(),
            reason: format!("{} is below 10·z̄*·t_end^σ = {need:.4e}", cfg.grid.x_right),
        });
    }
    Ok(())
}

pub fn simulate(cfg: &RunConfig) -> Result<(Grid, Trajectory)> {
    let grid = cfg.grid.build()?;
    let u0 = make_initial_data(cfg.initial_kind(), &grid)?;
    let reaction = cfg.reaction_spec();
    let bad = reaction.check(cfg.model.r, cfg.model.rbar, cfg.model.beta, cfg.model.s0);
    if !bad.is_empty() {
        return Err(Error::Config { path: "reaction".into(), reason: bad.join("; ") });
    }
    let traj = run(&grid, &u0, &reaction, &cfg.solver, &cfg.time.snapshot_times())?;
    Ok((grid, traj))
}

/// One track per configured level over the positive-time snapshots.
pub fn tracks(cfg: &RunConfig, grid: &Grid, snapshots: &[Field]) -> Result<Vec<LevelSetTrack>> {
    let positive: Vec<Field> = snapshots.iter().filter(|s| s.t > 0.0).cloned().collect();
    let decades = cfg.fit_decades();
    cfg.analysis.lambdas.iter().map(|&l| track_level_set(grid, &positive, l, decades)).collect()
}

/// Outcome of the full certificate suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub supersolution: Option<SupersolutionShift>,
    /// `u ≤ min(1, w̄(t + T, ·))` at every snapshot.
    pub upper_comparison: Option<ResidualReport>,
    pub subsolution_time: f64,
    /// Subsolution residual in both zones at times beyond `2T`.
    pub subsolution_zones: Vec<ResidualReport>,
    pub zone_times: Vec<f64>,
    pub calibration: Option<ShiftCalibration>,
    /// `v(t + T − T′, x + X′) ≤ u(t, x)` at the snapshots after `T′`.
    pub lower_comparison: Option<ResidualReport>,
    pub sandwich: Vec<SandwichReport>,
    pub notes: Vec<String>,
    pub pass: bool,
}

/// Runs the sub/supersolution certificates and the sandwich check against a
/// computed trajectory.
pub fn verify_certificates(
    cfg: &RunConfig,
    grid: &Grid,
    snapshots: &[Field],
    upper: &ProfileRun,
    reduced: &ProfileRun,
    level_tracks: &[LevelSetTrack],
) -> Result<CertificateReport> {
    let p = &cfg.model;
    let a = &cfg.analysis;
    let regime = classify_regime(p)?;
    let reaction = cfg.reaction_spec();
    let react = |s: f64| reaction.eval(s);
    let window = (f64::NEG_INFINITY, a.compare_window * grid.x_right());
    let mut notes = Vec::new();

    let (supersolution, upper_comparison) = if regime.improved_upper {
        let sh = supersolution_shift(&upper.solution, p, upper.solution.z_ref * 10f64.powf(a.cut_decades))?;
        let wbar = profile_field(&upper.solution, a.cut_decades)?;
        let capped = Capped { inner: &wbar, cap: 1.0 };
        let shifted = Shifted { inner: &capped, dt: sh.t_shift, dx: 0.0 };
        // u is pinned to zero at the right end, which can only help this side
        let everywhere = (f64::NEG_INFINITY, f64::INFINITY);
        let rep = compare_fields(grid, snapshots, &shifted, Direction::Below, everywhere, a.compare_tol, "u below capped supersolution");
        (Some(sh), Some(rep))
    } else {
        notes.push("alpha < 2/(1-m): no self-similar supersolution; upper comparison skipped".into());
        (None, None)
    };

    let w = profile_field(&reduced.solution, a.cut_decades)?;
    let sub = Subsolution::new(&reduced.solution, w, p, SubsolutionSpec::for_params(p)?)?;
    let (t_sub, _) = search_subsolution_time(&sub, p.m, &react, a.subsolution_start, a.subsolution_samples, a.subsolution_doublings)?;
    let zone_times: Vec<f64> = (0..8).map(|k| 3.0 * t_sub * 4f64.powi(k)).collect();
    let subsolution_zones = zone_reports(&sub, p.m, &react, &zone_times, a.subsolution_samples, a.residual_tol)?;

    let calibration = calibrate_subsolution_shift(grid, snapshots, &sub, t_sub, a.calibration_t_max, window.1, a.calibration_tol);
    let lower_comparison = calibration.map(|c| {
        let later: Vec<Field> = snapshots.iter().filter(|s| s.t >= c.t_prime).cloned().collect();
        let shifted = Shifted { inner: &sub, dt: c.t_sub - c.t_prime, dx: c.x_shift };
        compare_fields(grid, &later, &shifted, Direction::Above, window, a.compare_tol, "subsolution below u")
    });
    if calibration.is_none() {
        notes.push(format!("no snapshot up to t = {} lies above the subsolution", a.calibration_t_max));
    }

    let z0bar = regime.improved_upper.then_some(upper.z_star);
    let sandwich = level_tracks
        .iter()
        .map(|tr| check_sandwich(tr, p, reduced.z_star, z0bar, a.sandwich_from))
        .collect::<Result<Vec<_>>>()?;

    let pass = upper_comparison.as_ref().is_none_or(|r| r.pass)
        && subsolution_zones.iter().all(|r| r.pass)
        && lower_comparison.as_ref().is_some_and(|r| r.pass)
        && sandwich.iter().all(|s| s.pass);
    Ok(CertificateReport {
        supersolution,
        upper_comparison,
        subsolution_time: t_sub,
        subsolution_zones,
        zone_times,
        calibration,
        lower_comparison,
        sandwich,
        notes,
        pass,
    })
}
