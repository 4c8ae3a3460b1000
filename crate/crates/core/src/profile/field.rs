//! Continuous evaluation of a sampled profile and the self-similar field it
//! generates.

use super::ProfileSolution;
use crate::error::{Error, Result};
use crate::pde::Field;

/// C² interpolant of a profile.
///
/// Works in `(u, y) = (ln(z − z0), ln φ)`, where both asymptotic regimes are
/// close to straight lines, with quintic Hermite pieces matching `y`, `y_u`
/// and `y_uu` at every sample. Outside the sampled range the profile is
/// continued as a power of `z − z0` near the blow-up point and as the fitted
/// tail power beyond the last sample; such evaluations are flagged.
#[derive(Debug, Clone)]
pub struct ProfileEvaluator {
    pub z0: f64,
    pub sigma: f64,
    pub a: f64,
    u: Vec<f64>,
    y: Vec<f64>,
    yu: Vec<f64>,
    yuu: Vec<f64>,
    tail_slope: f64,
}

/// Value and derivatives of `φ` at a point, with an extrapolation flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
    pub extrapolated: bool,
}

impl ProfileEvaluator {
    /// Uses the samples with `z ≤ z_cut` (all when `None`). Cutting off the far
    /// end is useful for matched profiles, whose last decades carry the
    /// amplified matching error.
    pub fn new(sol: &ProfileSolution, z_cut: Option<f64>) -> Result<Self> {
        let cut = z_cut.unwrap_or(f64::INFINITY);
        let (mut u, mut y, mut yu, mut yuu) = (vec![], vec![], vec![], vec![]);
        for (i, p) in sol.samples.iter().enumerate() {
            if p.z > cut || p.phi <= 0.0 {
                break;
            }
            let s = p.z - sol.z0;
            if s <= 0.0 {
                continue;
            }
            let (phi, d, dd) = sol.derivatives_at(i);
            let l = s * d / phi;
            let ui = s.ln();
            if u.last().is_some_and(|&prev| ui <= prev) {
                continue;
            }
            u.push(ui);
            y.push(phi.ln());
            yu.push(l);
            yuu.push(s * s * (dd / phi - (d / phi) * (d / phi)) + l);
        }
        if u.len() < 2 {
            return Err(Error::Domain("profile has fewer than two usable samples".into()));
        }
        let tail_slope = sol.decay_slope_fit.unwrap_or(-sol.spec.fast_decay_exp());
        Ok(Self { z0: sol.z0, sigma: sol.spec.sigma(), a: sol.spec.a(), u, y, yu, yuu, tail_slope })
    }

    pub fn z_range(&self) -> (f64, f64) {
        (self.z0 + self.u[0].exp(), self.z0 + self.u[self.u.len() - 1].exp())
    }

    /// `φ` and its derivatives; `φ = +∞` at or left of the blow-up point.
    pub fn eval(&self, z: f64) -> ProfilePoint {
        let s = z - self.z0;
        if s <= 0.0 {
            return ProfilePoint { phi: f64::INFINITY, dphi: f64::NEG_INFINITY, ddphi: f64::INFINITY, extrapolated: false };
        }
        let uz = s.ln();
        let n = self.u.len();
        let (yv, yd, ydd, extrapolated) = if uz < self.u[0] {
            let l = self.yu[0];
            (self.y[0] + l * (uz - self.u[0]), l, 0.0, true)
        } else if uz > self.u[n - 1] {
            // continue as φ_last · (z / z_last)^slope
            let z_last = self.z0 + self.u[n - 1].exp();
            let k = self.tail_slope;
            let yv = self.y[n - 1] + k * (z.ln() - z_last.ln());
            // y as a function of u = ln s with z = z0 + e^u
            let dz = s / z;
            let yd = k * dz;
            let ydd = k * dz * (1.0 - dz);
            (yv, yd, ydd, true)
        } else {
            let i = match self.u.binary_search_by(|v| v.partial_cmp(&uz).unwrap()) {
                Ok(i) => i.min(n - 2),
                Err(i) => i - 1,
            };
            let (a, b) = self.hermite(i, uz);
            (a, b.0, b.1, false)
        };
        let phi = yv.exp();
        let dphi = phi * yd / s;
        let ddphi = phi * (ydd + yd * yd - yd) / (s * s);
        ProfilePoint { phi, dphi, ddphi, extrapolated }
    }

    fn hermite(&self, i: usize, uz: f64) -> (f64, (f64, f64)) {
        let h = self.u[i + 1] - self.u[i];
        let t = (uz - self.u[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        // basis and their t-derivatives
        let h0 = [1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5, -30.0 * t2 + 60.0 * t3 - 30.0 * t4, -60.0 * t + 180.0 * t2 - 120.0 * t3];
        let h1 = [t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5, 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4, -36.0 * t + 96.0 * t2 - 60.0 * t3];
        let h2 = [
            0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5),
            0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4),
            0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3),
        ];
        let h5 = [10.0 * t3 - 15.0 * t4 + 6.0 * t5, 30.0 * t2 - 60.0 * t3 + 30.0 * t4, 60.0 * t - 180.0 * t2 + 120.0 * t3];
        let h4 = [-4.0 * t3 + 7.0 * t4 - 3.0 * t5, -12.0 * t2 + 28.0 * t3 - 15.0 * t4, -24.0 * t + 84.0 * t2 - 60.0 * t3];
        let h3 = [
            0.5 * (t3 - 2.0 * t4 + t5),
            0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4),
            0.5 * (6.0 * t - 24.0 * t2 + 20.0 * t3),
        ];
        let c = [
            self.y[i],
            h * self.yu[i],
            h * h * self.yuu[i],
            h * h * self.yuu[i + 1],
            h * self.yu[i + 1],
            self.y[i + 1],
        ];
        let mut out = [0.0; 3];
        for k in 0..3 {
            out[k] = c[0] * h0[k] + c[1] * h1[k] + c[2] * h2[k] + c[3] * h3[k] + c[4] * h4[k] + c[5] * h5[k];
        }
        (out[0], (out[1] / h, out[2] / (h * h)))
    }
}

/// `w(t, x) = t^{−1/(β−1)} φ(x t^{−σ})`, infinite left of the blow-up line.
#[derive(Debug, Clone)]
pub struct SelfSimilarField {
    pub profile: ProfileEvaluator,
}

/// `w` and its partial derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    pub w: f64,
    pub w_t: f64,
    pub w_x: f64,
    pub w_xx: f64,
    pub extrapolated: bool,
}

impl SelfSimilarField {
    pub fn new(profile: ProfileEvaluator) -> Self {
        Self { profile }
    }

    /// Position of the blow-up line `z0 t^σ`.
    pub fn front(&self, t: f64) -> f64 {
        self.profile.z0 * t.powf(self.profile.sigma)
    }

    pub fn eval(&self, t: f64, x: f64) -> FieldPoint {
        let (a, sg) = (self.profile.a, self.profile.sigma);
        let ts = t.powf(sg);
        let z = x / ts;
        let p = self.profile.eval(z);
        let ta = t.powf(-a);
        FieldPoint {
            w: ta * p.phi,
            w_t: ta / t * (-a * p.phi - sg * z * p.dphi),
            w_x: ta / ts * p.dphi,
            w_xx: ta / (ts * ts) * p.ddphi,
            extrapolated: p.extrapolated,
        }
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.eval(t, x).w
    }
}

/// Samples `min(cap, w(t, ·))` on `nodes`. Returns the field and the number
/// of nodes evaluated by extrapolation.
pub fn profile_to_field(w: &SelfSimilarField, t: f64, cap: f64, nodes: &[f64]) -> Result<(Field, usize)> {
    if !(t > 0.0) || !(cap > 0.0 && cap <= 1.0) {
        return Err(Error::Domain(format!("profile_to_field needs t > 0 and cap in (0,1], got t = {t}, cap = {cap}")));
    }
    let mut extrapolated = 0;
    let values = nodes
        .iter()
        .map(|&x| {
            let p = w.eval(t, x);
            if p.extrapolated && p.w < cap {
                extrapolated += 1;
            }
            p.w.min(cap)
        })
        .collect();
    Ok((Field { t, values }, extrapolated))
}
