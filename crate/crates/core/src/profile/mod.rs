//! The self-similar profile equation
//!
//! ```text
//! −a·(φ + σ·z·φ′) = (φ^m)″ + r·φ^β,    a = 1/(β−1),  σ = (β−m)/(2(β−1))
//! ```
//!
//! whose decreasing solutions blowing up at `z0` and decaying like
//! `z^{−2/(1−m)}` generate the self-similar solutions
//! `w(t,x) = t^{−a} φ(x t^{−σ})` of `u_t = (u^m)_xx + r u^β`.
//!
//! Internally the equation is integrated as a first-order system in
//! `v = φ^m` and the flux `q = v′`; see [`ProfileOdeSpec::rhs`].

mod estimates;
mod field;
mod shoot;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use estimates::{verify_profile_estimates, CheckReport, EstimateBundle};
pub use field::{profile_to_field, ProfileEvaluator, SelfSimilarField};
pub use shoot::{
    classify_decay, coarse_scan, inner_slope_bracket, integrate_profile, match_z_star, shoot_inner,
    DecayClass, InnerVerdict, MatchResult, ScanEntry, Side, SlopeBracket, Termination,
};

/// Parameters of the profile equation. `r_eff` is `r − ε` when the profile
/// feeds a subsolution and `r̄` when it feeds a supersolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileOdeSpec {
    pub m: f64,
    pub beta: f64,
    pub r_eff: f64,
}

impl ProfileOdeSpec {
    pub fn new(m: f64, beta: f64, r_eff: f64) -> Result<Self> {
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::InvalidParams(format!("m = {m} outside (0,1)")));
        }
        if !(beta > 1.0 && beta < 2.0 - m) {
            return Err(Error::InvalidParams(format!("beta = {beta} outside (1, 2−m)")));
        }
        if !(r_eff > 0.0 && r_eff.is_finite()) {
            return Err(Error::InvalidParams(format!("r_eff = {r_eff} must be positive")));
        }
        Ok(Self { m, beta, r_eff })
    }

    /// The reaction-free equation, for which `C∞ z^{−2/(1−m)}` is exact.
    pub fn without_reaction(m: f64, beta: f64) -> Result<Self> {
        let mut s = Self::new(m, beta, 1.0)?;
        s.r_eff = 0.0;
        Ok(s)
    }

    /// `1/(β−1)`: blow-up exponent and time-decay exponent of `w`.
    pub fn a(&self) -> f64 {
        1.0 / (self.beta - 1.0)
    }

    pub fn sigma(&self) -> f64 {
        (self.beta - self.m) / (2.0 * (self.beta - 1.0))
    }

    pub fn fast_decay_exp(&self) -> f64 {
        2.0 / (1.0 - self.m)
    }

    pub fn slow_decay_exp(&self) -> f64 {
        2.0 / (self.beta - self.m)
    }

    #[inline]
    pub fn phi_of_v(&self, v: f64) -> f64 {
        if v > 0.0 {
            v.powf(1.0 / self.m)
        } else {
            0.0
        }
    }

    /// Right-hand side of the `(v, q)` system at abscissa `z`.
    pub fn rhs(&self, z: f64, y: &[f64; 2]) -> [f64; 2] {
        let (v, q) = (y[0], y[1]);
        let phi = self.phi_of_v(v);
        let dphi = if v > 0.0 { v.powf(1.0 / self.m - 1.0) * q / self.m } else { 0.0 };
        let dq = -self.a() * phi - self.sigma() * z * dphi - self.r_eff * phi.powf(self.beta);
        [q, dq]
    }

    pub fn jac(&self, z: f64, y: &[f64; 2]) -> [[f64; 2]; 2] {
        let (v, q) = (y[0], y[1]);
        if v <= 0.0 {
            return [[0.0, 1.0], [0.0, 0.0]];
        }
        let im = 1.0 / self.m;
        let phi = v.powf(im);
        let dphi_dv = im * v.powf(im - 1.0);
        let ddphi_dv = im * (im - 1.0) * v.powf(im - 2.0) * q;
        let ddphi_dq = im * v.powf(im - 1.0);
        let s = self.sigma();
        let dq_dv = -self.a() * dphi_dv
            - s * z * ddphi_dv
            - self.r_eff * self.beta * phi.powf(self.beta - 1.0) * dphi_dv;
        let dq_dq = -s * z * ddphi_dq;
        [[0.0, 1.0], [dq_dv, dq_dq]]
    }

    /// `(φ, φ′, φ″)` from the internal state.
    pub fn derivatives(&self, z: f64, v: f64, q: f64) -> (f64, f64, f64) {
        let m = self.m;
        let phi = self.phi_of_v(v);
        if phi <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let dphi = phi.powf(1.0 - m) * q / m;
        let dq = self.rhs(z, &[v, q])[1];
        // v = φ^m  ⇒  q′ = m φ^{m−1} φ″ + m(m−1) φ^{m−2} φ′²
        let ddphi = (dq - m * (m - 1.0) * phi.powf(m - 2.0) * dphi * dphi) / (m * phi.powf(m - 1.0));
        (phi, dphi, ddphi)
    }

    /// Signed residual `RHS − LHS` of the profile equation for a trial
    /// function given by its value and first two derivatives. Nonnegative
    /// means subsolution, nonpositive supersolution.
    pub fn residual(&self, z: f64, phi: f64, dphi: f64, ddphi: f64) -> f64 {
        let m = self.m;
        let diff = m * phi.powf(m - 1.0) * ddphi + m * (m - 1.0) * phi.powf(m - 2.0) * dphi * dphi;
        diff + self.r_eff * phi.powf(self.beta) + self.a() * phi + self.sigma() * z * dphi
    }
}

/// Prefactor making `C·(z−z0)^{−1/(β−1)}` balance transport against reaction
/// at leading order near `z0`.
pub fn c0_constant(spec: &ProfileOdeSpec, z0: f64) -> f64 {
    let b = spec.beta;
    (z0 * (b - spec.m) / (2.0 * spec.r_eff * (b - 1.0) * (b - 1.0))).powf(1.0 / (b - 1.0))
}

/// Prefactor of the exact reaction-free solution `C·z^{−2/(1−m)}`.
pub fn c_infinity(m: f64) -> f64 {
    (2.0 * m * (1.0 + m) / (1.0 - m)).powf(1.0 / (1.0 - m))
}

/// Relative width `κ` of the interval `(z0, z0 + κ z0]` on which
/// `γ·C0·(z−z0)^{−1/(β−1)}` is guaranteed to be a subsolution.
///
/// Obtained by dropping the (positive) diffusion term and keeping the
/// reaction excess `(γ^β − γ) r C0^β` against the adverse linear term.
pub fn kappa(spec: &ProfileOdeSpec, gamma: f64) -> f64 {
    let (b, m) = (spec.beta, spec.m);
    (gamma.powf(b) - gamma) * (b - m) / (gamma * (2.0 - m - b))
}

/// Anchor point `(z, φ, φ′)` on the leading-order blow-up barrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub z: f64,
    pub phi: f64,
    pub dphi: f64,
}

/// Leading-order blow-up seed at `z0 + delta`. The admissible offsets are
/// `0 < delta ≤ κ z0`, with `κ` taken at band factor `gamma`.
pub fn blowup_seed(spec: &ProfileOdeSpec, z0: f64, c: f64, delta: f64, gamma: f64) -> Result<Anchor> {
    let kz = kappa(spec, gamma) * z0;
    if !(delta > 0.0 && delta <= kz * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!(
            "blow-up seed offset {delta} outside (0, κ z0 = {kz}]"
        )));
    }
    let a = spec.a();
    Ok(Anchor {
        z: z0 + delta,
        phi: c * delta.powf(-a),
        dphi: -a * c * delta.powf(-a - 1.0),
    })
}

/// Closed-form barrier functions and their residuals.
pub mod barriers {
    use super::ProfileOdeSpec;

    /// `C (z − z0)^{−1/(β−1)}` and its first two derivatives.
    pub fn blowup(spec: &ProfileOdeSpec, z0: f64, c: f64, z: f64) -> (f64, f64, f64) {
        let a = spec.a();
        let s = z - z0;
        let p = c * s.powf(-a);
        (p, -a * p / s, a * (a + 1.0) * p / (s * s))
    }

    /// `C z^{−2/(1−m)}` and its first two derivatives.
    pub fn tail(spec: &ProfileOdeSpec, c: f64, z: f64) -> (f64, f64, f64) {
        let k = spec.fast_decay_exp();
        let p = c * z.powf(-k);
        (p, -k * p / z, k * (k + 1.0) * p / (z * z))
    }

    /// Guard `(z − z0)^{−γ1}`.
    pub fn guard(gamma1: f64, z0: f64, z: f64) -> (f64, f64, f64) {
        let s = z - z0;
        let p = s.powf(-gamma1);
        (p, -gamma1 * p / s, gamma1 * (gamma1 + 1.0) * p / (s * s))
    }

    pub fn blowup_residual(spec: &ProfileOdeSpec, z0: f64, c: f64, z: f64) -> f64 {
        let (p, d, dd) = blowup(spec, z0, c, z);
        spec.residual(z, p, d, dd)
    }

    pub fn tail_residual(spec: &ProfileOdeSpec, c: f64, z: f64) -> f64 {
        let (p, d, dd) = tail(spec, c, z);
        spec.residual(z, p, d, dd)
    }
}

/// Knobs of the shooting and matching procedure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShootingConfig {
    /// Outer end of the inner window, as a fraction of `z0`; clipped to `κ`.
    pub delta0: f64,
    /// The anchor sits this many decades below `delta0·z0`.
    pub inner_decades: f64,
    pub gamma_band: f64,
    /// Guard exponent; `None` means `1/(2(1−m))`.
    pub gamma1: Option<f64>,
    /// Truncation point, as a multiple of `z0`.
    pub z_max: f64,
    pub tol_bisect: f64,
    pub tol_ode: f64,
    /// Decades above `z0` used for tail fits.
    pub tail_fit_window: (f64, f64),
    /// Step cap as a fraction of the distance to the blow-up point.
    pub max_step_rel: f64,
    /// Constant in the curvature bound `|φ″| ≤ δ φ^{β+1−m}` on the inner window.
    pub curvature_delta: f64,
    /// Values of `φ` below this count as having reached zero.
    pub phi_floor: f64,
    /// Relative tolerance of the integral identity check.
    pub identity_tol: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            delta0: 1e-3,
            inner_decades: 3.0,
            gamma_band: 1.2,
            gamma1: None,
            z_max: 1e6,
            tol_bisect: 1e-13,
            tol_ode: 1e-12,
            tail_fit_window: (2.0, 4.0),
            max_step_rel: 0.02,
            curvature_delta: 1e-3,
            phi_floor: 1e-250,
            identity_tol: 1e-6,
        }
    }
}

impl ShootingConfig {
    pub fn gamma1_for(&self, m: f64) -> f64 {
        self.gamma1.unwrap_or(0.5 / (1.0 - m))
    }

    pub fn validate(&self, m: f64) -> Result<()> {
        let g1 = self.gamma1_for(m);
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(g1 > 0.0 && g1 < 1.0 / (1.0 - m)) {
            return bad(format!("gamma1 = {g1} outside (0, 1/(1−m))"));
        }
        if !(self.gamma_band > 1.0) {
            return bad(format!("gamma_band = {} must exceed 1", self.gamma_band));
        }
        if !(self.delta0 > 0.0 && self.inner_decades > 0.0) {
            return bad("delta0 and inner_decades must be positive".into());
        }
        if !(self.z_max > 10.0) {
            return bad(format!("z_max = {} must be much larger than 1", self.z_max));
        }
        if !(self.tol_bisect > 0.0 && self.tol_ode > 0.0 && self.max_step_rel > 0.0) {
            return bad("tolerances and step cap must be positive".into());
        }
        Ok(())
    }
}

/// One stored point of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileState {
    pub z: f64,
    pub phi: f64,
    /// Flux `(φ^m)′`.
    pub q: f64,
}

/// A computed profile with its fitted asymptotic constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSolution {
    pub spec: ProfileOdeSpec,
    /// Blow-up point; for profiles seeded away from a blow-up it is `0`
    /// and only serves as the origin of the inner variable `z − z0`.
    pub z0: f64,
    pub anchor: Anchor,
    pub samples: Vec<ProfileState>,
    pub c_blow_fit: Option<f64>,
    pub blow_exp_fit: Option<f64>,
    /// `None` when the tail window could not be classified.
    pub decay_class: Option<DecayClass>,
    pub c_decay_fit: Option<f64>,
    pub decay_slope_fit: Option<f64>,
    pub k0: f64,
    pub big_k0: f64,
    /// Outer end of the inner window (absolute `z`).
    pub inner_end: f64,
    /// Reference abscissa for tail windows (`z0`, or the seed point).
    pub z_ref: f64,
    pub termination: Termination,
}

impl ProfileSolution {
    pub fn z_end(&self) -> f64 {
        self.samples.last().map(|s| s.z).unwrap_or(self.anchor.z)
    }

    /// `(φ, φ′, φ″)` at sample `i`.
    pub fn derivatives_at(&self, i: usize) -> (f64, f64, f64) {
        let s = &self.samples[i];
        self.spec.derivatives(s.z, s.phi.powf(self.spec.m), s.q)
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].phi < w[0].phi)
    }
}
