//! Implicit-diffusion, explicit-reaction time stepping.
//!
//! Each step solves, for the pressure-like variable `v = u^m`,
//!
//! ```text
//! v^{1/m} − dt·D₂v = u_old + dt·f(u_old)
//! ```
//!
//! with Dirichlet values at both ends, by Newton's method. `D₂` is the
//! standard three-point second difference on a nonuniform grid, so
//! `−dt·D₂` is an M-matrix and `v ↦ max(v,0)^{1/m}` is convex: after the first
//! iterate Newton decreases monotonically to the solution and never leaves
//! `[0, 1]`. The scheme is monotone as long as `1 + dt·f′ ≥ 0`, which the
//! reaction step bound guarantees.

use serde::{Deserialize, Serialize};

use super::{Field, Grid, ReactionSpec};
use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub m: f64,
    /// Step-doubling error tolerance `|Δu| ≤ atol + rtol·|u|`.
    pub rtol: f64,
    pub atol: f64,
    pub dt_init: f64,
    /// Upper bound on the step; the reaction bound `0.1/max|f′|` also applies.
    pub dt_max: f64,
    /// Disables adaptivity when set.
    pub fixed_dt: Option<f64>,
    /// Newton stops once `|Δv| ≤ newton_tol·(|v| + newton_floor)` at every node.
    pub newton_tol: f64,
    pub newton_floor: f64,
    pub max_newton: usize,
    pub max_halvings: usize,
    /// `max u` over the last `guard_fraction` of the nodes must stay below this.
    pub right_guard: f64,
    pub guard_fraction: f64,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            m: 0.5,
            rtol: 1e-3,
            atol: 1e-14,
            dt_init: 1e-8,
            dt_max: 0.05,
            fixed_dt: None,
            newton_tol: 1e-10,
            newton_floor: 1e-8,
            max_newton: 100,
            max_halvings: 30,
            right_guard: 1e-6,
            guard_fraction: 0.05,
            max_steps: 10_000_000,
        }
    }
}

impl SolverConfig {
    fn dt_cap(&self, reaction: &ReactionSpec) -> f64 {
        let l = reaction.lipschitz_hint();
        let bound = if l > 0.0 { 0.1 / l } else { f64::INFINITY };
        self.dt_max.min(bound)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub newton_iterations: usize,
    pub halvings: usize,
    /// Nodes where a Newton iterate had to be clamped at `v = 0`.
    pub clamps: usize,
}

impl StepStats {
    fn absorb(&mut self, o: StepStats) {
        self.newton_iterations += o.newton_iterations;
        self.halvings += o.halvings;
        self.clamps += o.clamps;
    }
}

struct Stencil {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Stencil {
    fn new(grid: &Grid) -> Self {
        let x = &grid.nodes;
        let n = x.len();
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 1..n - 1 {
            let hm = x[i] - x[i - 1];
            let hp = x[i + 1] - x[i];
            lower[i] = 2.0 / (hm * (hm + hp));
            upper[i] = 2.0 / (hp * (hm + hp));
        }
        Self { lower, upper }
    }
}

/// One implicit solve of size `dt`; `None` when Newton fails.
fn implicit_solve(
    st: &Stencil,
    u_old: &[f64],
    dt: f64,
    reaction: &ReactionSpec,
    cfg: &SolverConfig,
    stats: &mut StepStats,
) -> Option<Vec<f64>> {
    let n = u_old.len();
    let m = cfg.m;
    let im = 1.0 / m;
    let b: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                u_old[i]
            } else {
                u_old[i] + dt * reaction.eval(u_old[i])
            }
        })
        .collect();
    let mut v: Vec<f64> = u_old.iter().map(|u| u.max(0.0).powf(m)).collect();
    let mut lower = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for _ in 0..cfg.max_newton {
        stats.newton_iterations += 1;
        for i in 1..n - 1 {
            let vi = v[i].max(0.0);
            let g = vi.powf(im);
            let dg = im * vi.powf(im - 1.0);
            let (l, u) = (dt * st.lower[i], dt * st.upper[i]);
            let resid = g - (l * v[i - 1] + u * v[i + 1] - (l + u) * v[i]) - b[i];
            lower[i] = -l;
            upper[i] = -u;
            diag[i] = dg + l + u;
            rhs[i] = -resid;
        }
        // boundary rows: v stays at its Dirichlet value
        rhs[0] = 0.0;
        rhs[n - 1] = 0.0;
        let dv = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        let mut worst: f64 = 0.0;
        for i in 1..n - 1 {
            let nv = v[i] + dv[i];
            if !nv.is_finite() {
                return None;
            }
            // From v = 0 the first iterate overshoots in the far field and
            // Newton on v^{1/m} then roughly halves per iteration, hence the floor.
            let scale = v[i].abs().min(nv.abs()) + cfg.newton_floor;
            worst = worst.max(dv[i].abs() / scale);
            if nv < 0.0 {
                stats.clamps += 1;
                v[i] = 0.0;
            } else {
                v[i] = nv;
            }
        }
        if worst <= cfg.newton_tol {
            return Some(
                v.iter()
                    .enumerate()
                    .map(|(i, &vi)| if i == 0 || i == n - 1 { u_old[i] } else { vi.powf(im).min(1.0) })
                    .collect(),
            );
        }
    }
    None
}

fn solve_covering(
    st: &Stencil,
    u: &[f64],
    dt: f64,
    reaction: &ReactionSpec,
    cfg: &SolverConfig,
    stats: &mut StepStats,
) -> Result<Vec<f64>> {
    // Newton failure ⇒ cover dt by successively halved substeps
    let mut pieces = 1usize;
    for halving in 0..=cfg.max_halvings {
        let sub = dt / pieces as f64;
        let mut cur = u.to_vec();
        let mut ok = true;
        for _ in 0..pieces {
            match implicit_solve(st, &cur, sub, reaction, cfg, stats) {
                Some(next) => cur = next,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(cur);
        }
        stats.halvings = stats.halvings.max(halving + 1);
        pieces *= 2;
    }
    Err(Error::Solver { t: f64::NAN, reason: format!("Newton failed after {} halvings", cfg.max_halvings) })
}

/// Advances `field` by `dt` (one implicit step, split into halves if Newton
/// fails).
pub fn step(grid: &Grid, field: &Field, dt: f64, reaction: &ReactionSpec, cfg: &SolverConfig) -> Result<(Field, StepStats)> {
    if !(dt > 0.0) || field.values.len() != grid.len() {
        return Err(Error::Domain(format!("step: dt = {dt}, {} values on {} nodes", field.values.len(), grid.len())));
    }
    let st = Stencil::new(grid);
    let mut stats = StepStats::default();
    let values = solve_covering(&st, &field.values, dt, reaction, cfg, &mut stats)
        .map_err(|e| relabel(e, field.t))?;
    Ok((Field { t: field.t + dt, values }, stats))
}

fn relabel(e: Error, t: f64) -> Error {
    match e {
        Error::Solver { reason, .. } => Error::Solver { t, reason },
        e => e,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotStats {
    pub t: f64,
    pub min: f64,
    pub max: f64,
    /// Interior nodes where `u` is exactly zero.
    pub zeros: usize,
    pub monotone: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub accepted: usize,
    pub rejected: usize,
    pub totals: StepStats,
    pub dt_min: f64,
    pub dt_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<Field>,
    pub snapshot_stats: Vec<SnapshotStats>,
    pub stats: RunStats,
    pub complete: bool,
    pub failure: Option<String>,
}

fn snapshot_stats(f: &Field) -> SnapshotStats {
    let n = f.values.len();
    SnapshotStats {
        t: f.t,
        min: f.values.iter().cloned().fold(f64::INFINITY, f64::min),
        max: f.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        zeros: f.values[1..n - 1].iter().filter(|&&u| u == 0.0).count(),
        monotone: f.is_nonincreasing(),
    }
}

fn guard_violation(u: &[f64], cfg: &SolverConfig) -> Option<f64> {
    let n = u.len();
    let k = ((n as f64 * cfg.guard_fraction).ceil() as usize).clamp(1, n);
    let worst = u[n - k..n].iter().cloned().fold(0.0, f64::max);
    (worst >= cfg.right_guard).then_some(worst)
}

/// Integrates from `initial` to the last of `snapshot_times`, landing exactly
/// on each of them.
///
/// Time steps are chosen by step doubling: a full step is compared to two half
/// steps, the half-step result is kept, and the next step is scaled by
/// `0.9/√err`. On failure the trajectory collected so far is returned with
/// `complete = false`.
pub fn run(
    grid: &Grid,
    initial: &Field,
    reaction: &ReactionSpec,
    cfg: &SolverConfig,
    snapshot_times: &[f64],
) -> Result<Trajectory> {
    grid.validate()?;
    if initial.values.len() != grid.len() {
        return Err(Error::Domain("initial data does not match the grid".into()));
    }
    if initial.values.iter().any(|u| !(0.0..=1.0).contains(u)) {
        return Err(Error::Domain("initial data outside [0, 1]".into()));
    }
    if !(cfg.m > 0.0 && cfg.m < 1.0) {
        return Err(Error::InvalidParams(format!("m = {} outside (0,1)", cfg.m)));
    }
    let mut times: Vec<f64> = snapshot_times.to_vec();
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| *t < initial.t) {
        return Err(Error::Domain("snapshot times must be strictly increasing and not before t0".into()));
    }
    let st = Stencil::new(grid);
    let cap = cfg.dt_cap(reaction);
    let mut traj = Trajectory {
        snapshots: Vec::new(),
        snapshot_stats: Vec::new(),
        stats: RunStats { dt_min: f64::INFINITY, ..RunStats::default() },
        complete: true,
        failure: None,
    };
    let mut t = initial.t;
    let mut u = initial.values.clone();
    // snapshots at t0 are taken immediately
    while times.first().is_some_and(|&s| s <= t) {
        let f = Field { t, values: u.clone() };
        traj.snapshot_stats.push(snapshot_stats(&f));
        traj.snapshots.push(f);
        times.remove(0);
    }
    let mut dt = cfg.fixed_dt.unwrap_or(cfg.dt_init).min(cap);
    for &target in &times {
        while t < target {
            if traj.stats.accepted + traj.stats.rejected >= cfg.max_steps {
                return Ok(fail(traj, t, "step budget exhausted".into()));
            }
            let mut h = dt.min(cap);
            let land = target - t <= h * (1.0 + 1e-12);
            if land {
                h = target - t;
            }
            let mut s = StepStats::default();
            let result = if cfg.fixed_dt.is_some() {
                solve_covering(&st, &u, h, reaction, cfg, &mut s).map(|v| (v, 0.0))
            } else {
                step_doubling(&st, &u, h, reaction, cfg, &mut s)
            };
            traj.stats.totals.absorb(s);
            let (next, err) = match result {
                Ok(x) => x,
                Err(e) => return Ok(fail(traj, t, relabel(e, t).to_string())),
            };
            if err > 1.0 {
                traj.stats.rejected += 1;
                dt = h * (0.9 / err.sqrt()).max(0.2);
                continue;
            }
            traj.stats.accepted += 1;
            traj.stats.dt_min = traj.stats.dt_min.min(h);
            traj.stats.dt_max = traj.stats.dt_max.max(h);
            t = if land { target } else { t + h };
            u = next;
            if let Some(w) = guard_violation(&u, cfg) {
                return Ok(fail(traj, t, format!("under-resolved: u = {w} near the right boundary")));
            }
            if cfg.fixed_dt.is_none() {
                let grow = if err > 0.0 { (0.9 / err.sqrt()).min(2.0) } else { 2.0 };
                // keep the pre-landing step size; a short landing step says nothing about it
                if !land {
                    dt = h * grow;
                }
            }
        }
        let f = Field { t, values: u.clone() };
        traj.snapshot_stats.push(snapshot_stats(&f));
        traj.snapshots.push(f);
    }
    Ok(traj)
}

fn step_doubling(
    st: &Stencil,
    u: &[f64],
    h: f64,
    reaction: &ReactionSpec,
    cfg: &SolverConfig,
    stats: &mut StepStats,
) -> Result<(Vec<f64>, f64)> {
    let full = solve_covering(st, u, h, reaction, cfg, stats)?;
    let half = solve_covering(st, u, 0.5 * h, reaction, cfg, stats)?;
    let two = solve_covering(st, &half, 0.5 * h, reaction, cfg, stats)?;
    let err = full
        .iter()
        .zip(&two)
        .map(|(a, b)| (a - b).abs() / (cfg.atol + cfg.rtol * b.abs()))
        .fold(0.0, f64::max);
    Ok((two, err))
}

fn fail(mut traj: Trajectory, t: f64, reason: String) -> Trajectory {
    traj.complete = false;
    traj.failure = Some(format!("t = {t}: {reason}"));
    traj
}
