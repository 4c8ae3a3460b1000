//! Finite-difference solver for `u_t = (u^m)_xx + f(u)` on a stretched 1D grid.

mod solver;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use solver::{run, step, RunStats, SnapshotStats, SolverConfig, StepStats, Trajectory};

/// Strictly increasing node positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nodes: Vec<f64>,
}

/// Largest admissible ratio between adjacent cell widths.
pub const MAX_STRETCH: f64 = 1.1;

impl Grid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        let g = Self { nodes };
        g.check_ordering()?;
        Ok(g)
    }

    /// Uniform spacing `h` on `[x_left, x_uniform]`, then cells growing by
    /// `ratio` up to `x_right` (the last cell is merged so the grid ends
    /// exactly there).
    pub fn stretched(x_left: f64, h: f64, x_uniform: f64, ratio: f64, x_right: f64) -> Result<Self> {
        if !(h > 0.0 && x_uniform > x_left && x_right > x_uniform && (1.0..=MAX_STRETCH).contains(&ratio)) {
            return Err(Error::Domain(format!(
                "bad grid spec: x_left {x_left}, h {h}, x_uniform {x_uniform}, ratio {ratio}, x_right {x_right}"
            )));
        }
        let n_uni = ((x_uniform - x_left) / h).round().max(1.0) as usize;
        let h_uni = (x_uniform - x_left) / n_uni as f64;
        let mut nodes: Vec<f64> = (0..=n_uni).map(|i| x_left + i as f64 * h_uni).collect();
        // Smallest number of growing cells reaching x_right, then the growth
        // factor (≤ ratio) that makes them end exactly there.
        let span = x_right - x_uniform;
        let reach = |q: f64, n: usize| -> f64 {
            if q == 1.0 {
                h_uni * n as f64
            } else {
                h_uni * q * (q.powi(n as i32) - 1.0) / (q - 1.0)
            }
        };
        let mut n = 1usize;
        while reach(ratio, n) < span {
            n += 1;
        }
        let (mut lo, mut hi) = (1.0, ratio);
        if reach(1.0, n) >= span {
            hi = 1.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if reach(mid, n) < span {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q = hi;
        let mut dx = h_uni;
        let mut x = x_uniform;
        for _ in 0..n - 1 {
            dx *= q;
            x += dx;
            nodes.push(x);
        }
        nodes.push(x_right);
        Self::new(nodes)
    }

    /// Mirror image of `stretched(0, …)` about the origin, for data
    /// symmetric in `x`.
    pub fn symmetric(h: f64, x_uniform: f64, ratio: f64, x_right: f64) -> Result<Self> {
        let half = Self::stretched(0.0, h, x_uniform, ratio, x_right)?;
        let mut nodes: Vec<f64> = half.nodes.iter().skip(1).rev().map(|x| -x).collect();
        nodes.extend_from_slice(&half.nodes);
        Self::new(nodes)
    }

    /// Ordering plus the stretching limit the solver's accuracy relies on.
    pub fn validate(&self) -> Result<()> {
        self.check_ordering()?;
        if self.max_stretch() > MAX_STRETCH * (1.0 + 1e-9) {
            return Err(Error::Domain(format!("grid stretching {} exceeds {MAX_STRETCH}", self.max_stretch())));
        }
        Ok(())
    }

    fn check_ordering(&self) -> Result<()> {
        let n = &self.nodes;
        if n.len() < 3 {
            return Err(Error::Domain("grid needs at least three nodes".into()));
        }
        for w in n.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::Domain(format!("grid not strictly increasing at {}", w[0])));
            }
        }
        Ok(())
    }

    /// Largest ratio between adjacent cell widths.
    pub fn max_stretch(&self) -> f64 {
        self.nodes
            .windows(3)
            .map(|w| {
                let (a, b) = (w[1] - w[0], w[2] - w[1]);
                if a > b { a / b } else { b / a }
            })
            .fold(1.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x_left(&self) -> f64 {
        self.nodes[0]
    }

    pub fn x_right(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }
}

/// Solution values at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub t: f64,
    pub values: Vec<f64>,
}

impl Field {
    /// Piecewise-linear interpolation on `grid`; constant beyond the ends.
    pub fn value_at(&self, grid: &Grid, x: f64) -> f64 {
        let n = &grid.nodes;
        if x <= n[0] {
            return self.values[0];
        }
        if x >= n[n.len() - 1] {
            return self.values[n.len() - 1];
        }
        let i = n.partition_point(|&v| v <= x) - 1;
        let th = (x - n[i]) / (n[i + 1] - n[i]);
        self.values[i] * (1.0 - th) + self.values[i + 1] * th
    }

    /// Nonincreasing up to round-off (`1e−14`; values live in `[0, 1]`).
    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + 1e-14)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReactionSpec {
    /// `f(s) = rbar · s^β (1 − s)`.
    PowerLogistic { rbar: f64, beta: f64 },
    /// Values on a uniform grid of `[0, 1]`, linearly interpolated.
    Sampled { values: Vec<f64> },
    /// No reaction: pure fast diffusion.
    Zero,
}

impl ReactionSpec {
    pub fn eval(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        match self {
            Self::PowerLogistic { rbar, beta } => rbar * s.powf(*beta) * (1.0 - s),
            Self::Sampled { values } => {
                let n = values.len() - 1;
                let x = s * n as f64;
                let i = (x.floor() as usize).min(n - 1);
                let th = x - i as f64;
                values[i] * (1.0 - th) + values[i + 1] * th
            }
            Self::Zero => 0.0,
        }
    }

    /// Largest `|f′|`, used for the explicit-reaction step bound.
    pub fn lipschitz_hint(&self) -> f64 {
        match self {
            Self::PowerLogistic { rbar, beta } => rbar * beta,
            Self::Sampled { values } => {
                let n = (values.len() - 1) as f64;
                values.windows(2).map(|w| (w[1] - w[0]).abs() * n).fold(0.0, f64::max)
            }
            Self::Zero => 0.0,
        }
    }

    /// Checks `f(0) = f(1) = 0`, `f > 0` inside, `r s^β ≤ f(s)` on `[0, s0]`
    /// and `f(s) ≤ r̄ s^β` on `[0, 1]` by dense sampling. Returns the
    /// violations found.
    pub fn check(&self, r: f64, rbar: f64, beta: f64, s0: f64) -> Vec<String> {
        let mut bad = Vec::new();
        if let Self::Sampled { values } = self {
            if values.len() < 2 {
                return vec!["sampled reaction needs at least two values".into()];
            }
        }
        if self.eval(0.0).abs() > 1e-15 {
            bad.push("f(0) != 0".into());
        }
        if self.eval(1.0).abs() > 1e-15 {
            bad.push("f(1) != 0".into());
        }
        if matches!(self, Self::Zero) {
            return bad;
        }
        let n = 20_000;
        for i in 1..n {
            let s = i as f64 / n as f64;
            let f = self.eval(s);
            let sb = s.powf(beta);
            if !(f > 0.0) {
                bad.push(format!("f({s}) = {f} not positive"));
                break;
            }
            if s <= s0 && f < r * sb * (1.0 - 1e-12) {
                bad.push(format!("f({s}) = {f} < r s^beta = {}", r * sb));
                break;
            }
            if f > rbar * sb * (1.0 + 1e-12) {
                bad.push(format!("f({s}) = {f} > rbar s^beta = {}", rbar * sb));
                break;
            }
        }
        bad
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(non_snake_case)]
pub enum InitialKind {
    /// `1` for `x ≤ 0`, `C̄/x^α` for `x ≥ x0`, and a cosine blend in between.
    FrontAlgebraic { alpha: f64, Cbar: f64, x0: f64 },
    /// `1` for `x ≤ 0`, `0` beyond.
    FrontStep,
    /// `(1 − x²)²` on `[−1, 1]`.
    CompactBump,
}

/// Samples the initial datum on the grid.
pub fn make_initial_data(kind: InitialKind, grid: &Grid) -> Result<Field> {
    if let InitialKind::FrontAlgebraic { alpha, Cbar, x0 } = kind {
        if !(alpha > 0.0 && Cbar > 0.0 && x0 > 1.0 && Cbar / x0.powf(alpha) <= 1.0) {
            return Err(Error::Domain(format!(
                "front_algebraic needs alpha > 0, Cbar > 0, x0 > 1 and Cbar/x0^alpha <= 1; got ({alpha}, {Cbar}, {x0})"
            )));
        }
    }
    let values = grid
        .nodes
        .iter()
        .map(|&x| match kind {
            InitialKind::FrontAlgebraic { alpha, Cbar, x0 } => {
                if x <= 0.0 {
                    1.0
                } else if x >= x0 {
                    (Cbar / x.powf(alpha)).min(1.0)
                } else {
                    let end = (Cbar / x0.powf(alpha)).min(1.0);
                    let w = 0.5 * (1.0 + (std::f64::consts::PI * x / x0).cos());
                    end + (1.0 - end) * w
                }
            }
            InitialKind::FrontStep => {
                if x <= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            InitialKind::CompactBump => {
                if x.abs() < 1.0 {
                    (1.0 - x * x).powi(2)
                } else {
                    0.0
                }
            }
        })
        .collect();
    Ok(Field { t: 0.0, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stretched_grid_is_valid_and_ends_exactly() {
        let g = Grid::stretched(-20.0, 0.05, 10.0, 1.02, 1e6).unwrap();
        assert_eq!(g.x_right(), 1e6);
        assert!(g.max_stretch() <= 1.02 + 1e-12, "{}", g.max_stretch());
        let s = Grid::symmetric(0.05, 10.0, 1.05, 1e4).unwrap();
        assert!((s.x_left() + 1e4).abs() < 1e-9);
        assert!(s.nodes.contains(&0.0));
    }

    #[test]
    fn initial_data_examples() {
        let g = Grid::new(vec![-5.0, 0.0, 1.0, 2.0, 10.0]).unwrap();
        let f = make_initial_data(InitialKind::FrontAlgebraic { alpha: 4.0, Cbar: 1.0, x0: 2.0 }, &g).unwrap();
        assert!((f.values[4] - 1e-4).abs() < 1e-18);
        assert_eq!(f.values[0], 1.0);
        assert!(f.is_nonincreasing());
        let s = make_initial_data(InitialKind::FrontStep, &g).unwrap();
        assert_eq!(s.values[0], 1.0);
        let b = make_initial_data(InitialKind::CompactBump, &Grid::symmetric(0.1, 2.0, 1.05, 5.0).unwrap()).unwrap();
        assert!(b.values.iter().sum::<f64>() > 0.0);
        assert!(make_initial_data(InitialKind::FrontAlgebraic { alpha: 4.0, Cbar: 1.0, x0: 0.5 }, &g).is_err());
    }

    #[test]
    fn reaction_hypotheses() {
        let f = ReactionSpec::PowerLogistic { rbar: 1.0, beta: 1.2 };
        assert!(f.check(0.9, 1.0, 1.2, 0.1).is_empty());
        assert!(!f.check(0.9, 1.0, 1.2, 0.2).is_empty());
        assert!(ReactionSpec::Zero.check(0.0, 1.0, 1.2, 0.1).is_empty());
        let sampled = ReactionSpec::Sampled { values: (0..=100).map(|i| f.eval(i as f64 / 100.0)).collect() };
        assert!((sampled.eval(0.5) - f.eval(0.5)).abs() < 1e-3);
    }
}
