//! Qualitative properties of the implicit solver on small grids.

use fastfront::pde::{make_initial_data, run, Field, Grid, InitialKind, ReactionSpec, SolverConfig};
use proptest::prelude::*;

fn small_grid() -> Grid {
    Grid::stretched(-5.0, 0.1, 3.0, 1.08, 200.0).unwrap()
}

fn logistic() -> ReactionSpec {
    ReactionSpec::PowerLogistic { rbar: 1.0, beta: 1.2 }
}

fn cfg() -> SolverConfig {
    SolverConfig { rtol: 1e-4, ..SolverConfig::default() }
}

/// Nonincreasing data in `[0, 1]` equal to 1 on the left and 0 far right.
fn front_data(grid: &Grid, drops: &[f64], at: f64) -> Field {
    let values = grid
        .nodes
        .iter()
        .map(|&x| {
            if x <= 0.0 {
                1.0
            } else if x >= at {
                0.0
            } else {
                // piecewise-constant steps
                let k = ((x / at) * drops.len() as f64) as usize;
                drops[..=k.min(drops.len() - 1)].iter().product::<f64>()
            }
        })
        .collect();
    Field { t: 0.0, values }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ordered_data_stay_ordered(
        drops in prop::collection::vec(0.3..1.0f64, 4),
        scale in 0.2..1.0f64,
        at in 1.0..4.0f64,
    ) {
        let grid = small_grid();
        let upper = front_data(&grid, &drops, at);
        let lower = Field { t: 0.0, values: upper.values.iter().map(|u| u * scale).collect() };
        let times = [0.5, 1.0, 2.0];
        let c = cfg();
        let a = run(&grid, &lower, &logistic(), &c, &times).unwrap();
        let b = run(&grid, &upper, &logistic(), &c, &times).unwrap();
        prop_assert!(a.complete && b.complete);
        let tol = 10.0 * c.rtol;
        for (fa, fb) in a.snapshots.iter().zip(&b.snapshots) {
            for (ua, ub) in fa.values.iter().zip(&fb.values) {
                prop_assert!(*ua <= ub + tol, "t = {}: {ua} > {ub}", fa.t);
            }
        }
    }

    #[test]
    fn monotone_data_give_monotone_snapshots(
        drops in prop::collection::vec(0.3..1.0f64, 4),
        at in 1.0..4.0f64,
    ) {
        let grid = small_grid();
        let u0 = front_data(&grid, &drops, at);
        let tr = run(&grid, &u0, &logistic(), &cfg(), &[0.5, 1.0, 2.0]).unwrap();
        prop_assert!(tr.complete);
        for (f, s) in tr.snapshots.iter().zip(&tr.snapshot_stats) {
            prop_assert!(f.is_nonincreasing() && s.monotone, "t = {}", f.t);
            prop_assert!(s.min >= 0.0 && s.max <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn the_stable_state_invades() {
    let grid = Grid::stretched(-10.0, 0.05, 5.0, 1.02, 1e5).unwrap();
    let kind = InitialKind::FrontAlgebraic { alpha: 4.0, Cbar: 1.0, x0: 2.0 };
    let u0 = make_initial_data(kind, &grid).unwrap();
    let tr = run(&grid, &u0, &logistic(), &cfg(), &[5.0, 10.0, 20.0]).unwrap();
    assert!(tr.complete, "{:?}", tr.failure);
    let last = tr.snapshots.last().unwrap();
    // u ≈ 1 behind a region that keeps widening
    let inner: Vec<f64> = grid.nodes.iter().zip(&last.values).filter(|(x, _)| **x <= 2.0).map(|(_, u)| *u).collect();
    assert!(inner.iter().all(|u| *u > 0.99), "min {}", inner.iter().cloned().fold(1.0, f64::min));
    let half = |f: &Field| grid.nodes.iter().zip(&f.values).filter(|(_, u)| **u >= 0.5).map(|(x, _)| *x).fold(f64::MIN, f64::max);
    let pos: Vec<f64> = tr.snapshots.iter().map(half).collect();
    assert!(pos.windows(2).all(|w| w[1] > w[0]), "{pos:?}");
    // doubling time more than doubles the position: the front accelerates
    assert!(pos[2] - pos[1] > pos[1] - pos[0]);
}

#[test]
fn short_domain_trips_the_right_guard() {
    let grid = Grid::stretched(-5.0, 0.1, 3.0, 1.1, 30.0).unwrap();
    let u0 = make_initial_data(InitialKind::FrontStep, &grid).unwrap();
    let tr = run(&grid, &u0, &logistic(), &cfg(), &[0.0, 50.0]).unwrap();
    assert!(!tr.complete);
    assert!(tr.failure.is_some());
    assert!(!tr.snapshots.is_empty(), "snapshots before the failure are kept");
}

#[test]
fn step_data_become_positive_everywhere() {
    let grid = small_grid();
    let u0 = make_initial_data(InitialKind::FrontStep, &grid).unwrap();
    let tr = run(&grid, &u0, &logistic(), &cfg(), &[0.0, 0.5]).unwrap();
    assert_eq!(tr.snapshots[0].t, 0.0);
    assert!(tr.snapshot_stats[0].zeros > 0);
    assert_eq!(tr.snapshot_stats[1].zeros, 0, "fast diffusion has no free boundary");
}

#[test]
fn invalid_inputs_are_rejected() {
    let grid = small_grid();
    let mut u0 = make_initial_data(InitialKind::FrontStep, &grid).unwrap();
    assert!(run(&grid, &u0, &logistic(), &cfg(), &[1.0, 0.5]).is_err());
    assert!(run(&grid, &u0, &logistic(), &SolverConfig { m: 1.0, ..cfg() }, &[1.0]).is_err());
    u0.values[3] = 1.5;
    assert!(run(&grid, &u0, &logistic(), &cfg(), &[1.0]).is_err());
    let bad = InitialKind::FrontAlgebraic { alpha: 4.0, Cbar: 100.0, x0: 2.0 };
    assert!(make_initial_data(bad, &grid).is_err());
}
