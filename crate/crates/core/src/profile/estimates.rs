//! A-posteriori checks of the asymptotic and derivative estimates a matched
//! profile must satisfy before it is used to build sub/supersolutions.

use serde::{Deserialize, Serialize};

use super::{ProfileSolution, ShootingConfig};

/// Outcome of one sampled inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub n_samples: usize,
    /// Worst normalized value; the check passes when it is `≤ tolerance`.
    pub worst_value: f64,
    pub worst_z: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    fn from_values(name: &str, tolerance: f64, strict: bool, it: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut worst = f64::NEG_INFINITY;
        let mut worst_z = f64::NAN;
        let mut n = 0;
        for (z, val) in it {
            n += 1;
            // NaN counts as a violation
            if !(val <= worst) {
                worst = if val.is_nan() { f64::INFINITY } else { val };
                worst_z = z;
            }
        }
        let pass = n > 0 && if strict { worst < tolerance } else { worst <= tolerance };
        Self { name: name.into(), n_samples: n, worst_value: worst, worst_z, tolerance, pass }
    }
}

/// Smallest constants for which the far-field bounds hold on the sampled range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailConstants {
    /// `max −φ′ / φ^{(3−m)/2}`.
    pub k_prime: f64,
    /// `max |φ″| / φ^{2−m}`.
    pub k_second: f64,
    /// `min` and `max` of `φ z^{2/(1−m)}` on the tail window.
    pub k_inf: f64,
    pub big_k_inf: f64,
    pub z_from: f64,
    pub z_to: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateBundle {
    pub monotone: CheckReport,
    pub band: CheckReport,
    pub slope_bounds: CheckReport,
    pub curvature: CheckReport,
    pub tail_sign: CheckReport,
    pub tail: TailConstants,
    pub identity: CheckReport,
}

impl EstimateBundle {
    pub fn all_pass(&self) -> bool {
        self.reports().iter().all(|r| r.pass)
            && self.tail.k_prime.is_finite()
            && self.tail.k_second.is_finite()
    }

    pub fn reports(&self) -> [&CheckReport; 6] {
        [&self.monotone, &self.band, &self.slope_bounds, &self.curvature, &self.tail_sign, &self.identity]
    }
}

/// Evaluates, on the stored samples:
///
/// * the band `k0 ≤ φ·(z−z0)^{1/(β−1)} ≤ K0` and the slope bounds
///   `−k0^{1−β}/(β−1)·φ^β < φ′ < −K0^{1−β}/(β−1)·φ^β` on the inner window;
/// * the curvature bound `|φ″| ≤ δ φ^{β+1−m}` on the inner window;
/// * `φ′ < 0` and the tail constants `K′`, `K″`, `k∞`, `K∞` beyond it;
/// * constancy of `(φ^m)′ + c₂ z φ − ∫_z^{Z} (c₁ φ + r φ^β)`, with
///   `c₁ = (2−β+m)/(2(β−1))`, `c₂ = (β−m)/(2(β−1))`, relative to the size of its terms.
pub fn verify_profile_estimates(sol: &ProfileSolution, cfg: &ShootingConfig) -> EstimateBundle {
    let spec = sol.spec;
    let (m, beta, r) = (spec.m, spec.beta, spec.r_eff);
    let a = spec.a();
    let n = sol.samples.len();
    let derivs: Vec<(f64, f64, f64)> = (0..n).map(|i| sol.derivatives_at(i)).collect();
    let inner: Vec<usize> = (0..n).filter(|&i| sol.samples[i].z <= sol.inner_end).collect();

    let monotone = CheckReport::from_values(
        "strictly decreasing",
        0.0,
        true,
        sol.samples.windows(2).map(|w| (w[1].z, (w[1].phi - w[0].phi) / w[0].phi)),
    );

    let band = CheckReport::from_values(
        "inner band k0 <= phi (z-z0)^a <= K0",
        0.0,
        false,
        inner.iter().map(|&i| {
            let p = &sol.samples[i];
            let c = p.phi * (p.z - sol.z0).powf(a);
            (p.z, ((sol.k0 - c) / sol.k0).max((c - sol.big_k0) / sol.big_k0))
        }),
    );

    let lo_c = a * sol.k0.powf(1.0 - beta);
    let hi_c = a * sol.big_k0.powf(1.0 - beta);
    let slope_bounds = CheckReport::from_values(
        "inner slope bounds",
        0.0,
        true,
        inner.iter().map(|&i| {
            let (phi, d, _) = derivs[i];
            let pb = phi.powf(beta);
            let lower = -lo_c * pb;
            let upper = -hi_c * pb;
            (sol.samples[i].z, ((lower - d) / d.abs()).max((d - upper) / d.abs()))
        }),
    );

    let curvature = CheckReport::from_values(
        "inner curvature |phi''| <= delta phi^(beta+1-m)",
        cfg.curvature_delta,
        false,
        inner.iter().map(|&i| {
            let (phi, _, dd) = derivs[i];
            (sol.samples[i].z, dd.abs() / phi.powf(beta + 1.0 - m))
        }),
    );

    let (d1, d2) = cfg.tail_fit_window;
    let tail_lo = sol.z_ref * 10f64.powf(d1);
    let tail_hi = sol.z_ref * 10f64.powf(d2);
    let outer: Vec<usize> = (0..n)
        .filter(|&i| sol.samples[i].z >= sol.inner_end && sol.samples[i].z <= tail_hi)
        .collect();
    let tail_sign = CheckReport::from_values(
        "tail phi' < 0",
        0.0,
        true,
        outer.iter().map(|&i| (sol.samples[i].z, derivs[i].1)),
    );
    let mut tail = TailConstants {
        k_prime: 0.0,
        k_second: 0.0,
        k_inf: f64::INFINITY,
        big_k_inf: 0.0,
        z_from: sol.inner_end,
        z_to: tail_hi.min(sol.z_end()),
    };
    let p_fast = spec.fast_decay_exp();
    for &i in &outer {
        let (phi, d, dd) = derivs[i];
        tail.k_prime = tail.k_prime.max(-d / phi.powf((3.0 - m) / 2.0));
        tail.k_second = tail.k_second.max(dd.abs() / phi.powf(2.0 - m));
        let z = sol.samples[i].z;
        if z >= tail_lo {
            let c = phi * z.powf(p_fast);
            tail.k_inf = tail.k_inf.min(c);
            tail.big_k_inf = tail.big_k_inf.max(c);
        }
    }

    let identity = integral_identity(sol, &derivs, r, cfg.identity_tol);

    EstimateBundle { monotone, band, slope_bounds, curvature, tail_sign, tail, identity }
}

/// Sixth-order Hermite quadrature of `g = c₁φ + rφ^β` between samples, using
/// `g`, `g′` and `g″` at both ends.
fn integral_identity(sol: &ProfileSolution, derivs: &[(f64, f64, f64)], r: f64, tol: f64) -> CheckReport {
    let spec = sol.spec;
    let beta = spec.beta;
    let c1 = (2.0 - beta + spec.m) / (2.0 * (beta - 1.0));
    let c2 = spec.sigma();
    let n = sol.samples.len();
    if n < 2 {
        return CheckReport::from_values("integral identity", tol, false, std::iter::empty());
    }
    let g = |i: usize| {
        let (phi, d, dd) = derivs[i];
        let pb1 = if r > 0.0 { phi.powf(beta - 1.0) } else { 0.0 };
        let g0 = c1 * phi + r * pb1 * phi;
        let g1 = (c1 + r * beta * pb1) * d;
        let g2 = (c1 + r * beta * pb1) * dd
            + if r > 0.0 { r * beta * (beta - 1.0) * phi.powf(beta - 2.0) * d * d } else { 0.0 };
        (g0, g1, g2)
    };
    // tail integrals from sample i to the last sample
    let mut tail_int = vec![0.0; n];
    let mut gi1 = g(n - 1);
    for i in (0..n - 1).rev() {
        let gi = g(i);
        let h = sol.samples[i + 1].z - sol.samples[i].z;
        let piece = h / 2.0 * (gi.0 + gi1.0) + h * h / 10.0 * (gi.1 - gi1.1) + h * h * h / 120.0 * (gi.2 + gi1.2);
        tail_int[i] = tail_int[i + 1] + piece;
        gi1 = gi;
    }
    let last = &sol.samples[n - 1];
    let reference = last.q + c2 * last.z * last.phi;
    CheckReport::from_values(
        "integral identity",
        tol,
        false,
        (0..n).map(|i| {
            let p = &sol.samples[i];
            let val = p.q + c2 * p.z * p.phi - tail_int[i];
            let scale = p.q.abs() + c2 * p.z * p.phi + tail_int[i].abs();
            (p.z, (val - reference).abs() / scale)
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{barriers, c_infinity, Anchor, DecayClass, ProfileOdeSpec, ProfileState, Termination};

    #[test]
    fn identity_is_exact_on_the_reaction_free_tail() {
        let spec = ProfileOdeSpec::without_reaction(0.5, 1.2).unwrap();
        let c = c_infinity(0.5);
        let samples: Vec<ProfileState> = (0..=400)
            .map(|i| {
                let z = 10f64 * 10f64.powf(i as f64 * 0.01);
                let (p, d, _) = barriers::tail(&spec, c, z);
                ProfileState { z, phi: p, q: spec.m * p.powf(spec.m - 1.0) * d }
            })
            .collect();
        let sol = ProfileSolution {
            spec,
            z0: 0.0,
            anchor: Anchor { z: 10.0, phi: samples[0].phi, dphi: 0.0 },
            samples,
            c_blow_fit: None,
            blow_exp_fit: None,
            decay_class: Some(DecayClass::Fast),
            c_decay_fit: Some(c),
            decay_slope_fit: Some(-4.0),
            k0: 1.0,
            big_k0: 1.0,
            inner_end: 10.0,
            z_ref: 10.0,
            termination: Termination::Reached,
        };
        let b = verify_profile_estimates(&sol, &ShootingConfig::default());
        assert!(b.identity.pass, "{:?}", b.identity);
        assert!(b.identity.worst_value < 1e-10, "{:?}", b.identity);
        assert!(b.monotone.pass);
        assert!((b.tail.k_inf - c).abs() < 1e-9 && (b.tail.big_k_inf - c).abs() < 1e-9);
    }
}
