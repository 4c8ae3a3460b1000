//! Adaptive one-step integrators for small autonomous-or-not ODE systems.
//!
//! Two methods are provided:
//!
//! * [`dopri5`]: explicit Dormand–Prince 5(4) with the standard embedded error
//!   estimate. Used where the dynamics are non-stiff, e.g. shooting toward a
//!   blow-up point, where the interesting mode is the growing one.
//! * [`radau5`]: three-stage Radau IIA (order 5, L-stable) with full Newton on
//!   the stage equations and step-doubling error control. Used where a fast
//!   mode relaxes onto a slow manifold, e.g. continuing a blow-up profile away
//!   from its singularity.
//!
//! Both accept a per-point step cap and an observer that is called after every
//! accepted step and may stop the integration.

mod dopri;
mod radau;

pub use dopri::dopri5;
pub use radau::radau5;

/// Mixed error tolerance: component `i` is measured against
/// `atol + rtol · |y_i|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerance {
    pub fn relative(rtol: f64) -> Self {
        Self { rtol, atol: 1e-300 }
    }
}

/// Step-size limits shared by both integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLimits {
    /// Initial step magnitude. Zero lets the integrator pick one from the cap.
    pub h_init: f64,
    /// Steps shorter than `h_min_rel · max(|t|, 1e-300)` count as a collapse.
    pub h_min_rel: f64,
    pub max_steps: usize,
}

impl Default for StepLimits {
    fn default() -> Self {
        Self {
            h_init: 0.0,
            h_min_rel: 1e-14,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Status {
    /// Reached the requested end point.
    Finished,
    /// The observer asked to stop.
    Stopped,
    /// The controller needed a step below the minimum.
    StepCollapse,
    MaxSteps,
    /// The right-hand side or the state became NaN/inf.
    NonFinite,
}

#[derive(Debug, Clone, Copy)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub status: Status,
    pub accepted: usize,
    pub rejected: usize,
}

pub(crate) fn error_norm<const N: usize>(
    err: &[f64; N],
    y0: &[f64; N],
    y1: &[f64; N],
    tol: Tolerance,
) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..N {
        let sc = tol.atol + tol.rtol * y0[i].abs().max(y1[i].abs());
        worst = worst.max((err[i] / sc).abs());
    }
    worst
}

pub(crate) fn all_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}
