//! Problem parameters, hypothesis checks and the closed-form exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All scalar parameters of the reaction–diffusion problem.
///
/// `r ≤ f(s)/s^β` near zero (for `s ≤ s0`) and `f(s)/s^β ≤ rbar` everywhere;
/// the initial datum decays like `Cbar / x^alpha` beyond `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct ModelParams {
    pub m: f64,
    pub beta: f64,
    pub r: f64,
    pub rbar: f64,
    pub alpha: f64,
    pub Cbar: f64,
    pub x0: f64,
    pub s0: f64,
    pub eps: f64,
}

impl ModelParams {
    /// The reference case used throughout the tests.
    pub fn reference() -> Self {
        Self {
            m: 0.5,
            beta: 1.2,
            r: 1.0,
            rbar: 1.0,
            alpha: 4.0,
            Cbar: 1.0,
            x0: 2.0,
            s0: 0.5,
            eps: 0.1,
        }
    }

    /// Spreading exponent `(β − m) / (2(β − 1))`.
    pub fn sigma(&self) -> f64 {
        sigma(self.m, self.beta)
    }
}

pub fn sigma(m: f64, beta: f64) -> f64 {
    (beta - m) / (2.0 * (beta - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub in_scope: bool,
    pub improved_upper: bool,
    pub sigma: f64,
    pub blowup_exp: f64,
    pub fast_decay_exp: f64,
    pub slow_decay_exp: f64,
    pub notes: String,
}

/// Lists every violated hypothesis. An empty list means the parameters are admissible.
pub fn validate_params(p: &ModelParams) -> Vec<String> {
    let mut v = Vec::new();
    let all = [p.m, p.beta, p.r, p.rbar, p.alpha, p.Cbar, p.x0, p.s0, p.eps];
    if all.iter().any(|x| !x.is_finite()) {
        v.push("non-finite parameter".to_string());
    }
    if !(p.m > 0.0 && p.m < 1.0) {
        v.push("m outside (0,1)".into());
    }
    if !(p.beta > 1.0) {
        v.push("beta ≤ 1".into());
    }
    if !(p.r > 0.0) {
        v.push("r ≤ 0".into());
    }
    if !(p.rbar > 0.0) {
        v.push("rbar ≤ 0".into());
    }
    if !(p.r <= p.rbar) {
        v.push("r > rbar".into());
    }
    if !(p.alpha > 0.0) {
        v.push("alpha ≤ 0".into());
    }
    if !(p.Cbar > 0.0) {
        v.push("Cbar ≤ 0".into());
    }
    if !(p.x0 > 1.0) {
        v.push("x0 ≤ 1".into());
    }
    if !(p.s0 > 0.0 && p.s0 <= 1.0) {
        v.push("s0 outside (0,1]".into());
    }
    if !(p.eps > 0.0 && p.eps < 1.0) {
        v.push("eps outside (0,1)".into());
    }
    v
}

/// Classifies the spreading regime and evaluates the closed-form exponents.
pub fn classify_regime(p: &ModelParams) -> Result<RegimeReport> {
    let bad = validate_params(p);
    if !bad.is_empty() {
        return Err(Error::InvalidParams(bad.join("; ")));
    }
    let (m, beta, alpha) = (p.m, p.beta, p.alpha);
    let lower_ok = m + 2.0 / alpha <= beta;
    let upper_ok = beta < 2.0 - m;
    let tail_ok = alpha > 1.0 / (1.0 - m);
    let in_scope = lower_ok && upper_ok && tail_ok;
    let fast = 2.0 / (1.0 - m);
    let improved_upper = alpha >= fast;

    let mut notes = Vec::new();
    if !lower_ok {
        notes.push(format!("beta < m + 2/alpha = {}", m + 2.0 / alpha));
    }
    if !upper_ok {
        notes.push(format!("beta >= 2 - m = {} (no acceleration from the Allee term)", 2.0 - m));
    }
    if !tail_ok {
        notes.push(format!("alpha <= 1/(1-m) = {}", 1.0 / (1.0 - m)));
    }
    notes.push("linear invasion speed lower bound c0 exists but is not quantified".into());

    Ok(RegimeReport {
        in_scope,
        improved_upper,
        sigma: sigma(m, beta),
        blowup_exp: 1.0 / (beta - 1.0),
        fast_decay_exp: fast,
        slow_decay_exp: 2.0 / (beta - m),
        notes: notes.join("; "),
    })
}

/// Positions bracketing the accelerating level sets at time `t`.
///
/// The lower position is `(1−ε)·z0·t^σ`. The upper one is
/// `(1+ε)·z0bar·t^σ` in the improved regime, otherwise the generic
/// `(r̄·C̄^{β−1}(β−1)t)^{(β−m+ε)/(2(β−1))}`.
pub fn level_bounds(p: &ModelParams, t: f64, z0: f64, z0bar: Option<f64>) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("level_bounds: t = {t} must be positive")));
    }
    if !(z0 > 0.0) {
        return Err(Error::Domain(format!("level_bounds: z0 = {z0} must be positive")));
    }
    let report = classify_regime(p)?;
    let s = report.sigma;
    let x_minus = (1.0 - p.eps) * z0 * t.powf(s);
    let x_plus = if report.improved_upper {
        let zb = z0bar
            .filter(|z| *z > 0.0)
            .ok_or_else(|| Error::Domain("level_bounds: improved regime needs z0bar > 0".into()))?;
        (1.0 + p.eps) * zb * t.powf(s)
    } else {
        let base = p.rbar * p.Cbar.powf(p.beta - 1.0) * (p.beta - 1.0) * t;
        base.powf((p.beta - p.m + p.eps) / (2.0 * (p.beta - 1.0)))
    };
    Ok((x_minus, x_plus))
}
