//! Self-similar blow-up profiles and accelerating fronts for the
//! fast-diffusion equation `u_t = (u^m)_xx + f(u)` with a weak Allee
//! reaction `f(s) ~ r s^β`, `0 < m < 1 < β < 2 − m`.
//!
//! The crate is split by role:
//!
//! * [`params`] — parameters, hypotheses, spreading exponents and level bounds.
//! * [`profile`] — the singular profile ODE: barriers, blow-up shooting,
//!   matching of the blow-up point, a-posteriori estimates, self-similar fields.
//! * [`pde`] — implicit finite-difference solver on a stretched grid.
//! * [`analysis`] — level-set tracking, sub/supersolution certificates,
//!   comparison and sandwich checks.
//! * [`config`] / [`io`] — versioned TOML configuration and CSV/JSON artifacts.
//! * [`pipeline`] — the end-to-end steps built from the above.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod fit;
pub mod io;
pub mod linalg;
pub mod ode;
pub mod params;
pub mod pde;
pub mod pipeline;
pub mod profile;

pub use error::{Error, Result};
pub use params::{classify_regime, level_bounds, validate_params, ModelParams, RegimeReport};
