use super::{all_finite, error_norm, Outcome, Status, StepLimits, Tolerance};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 5th-order weights minus embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Dormand–Prince 5(4) with FSAL and a standard PI-free step controller.
///
/// Integrates from `t0` toward `t_end` (either direction). `h_cap(t)` bounds
/// the step magnitude at `t`; `observer(t, y)` runs after each accepted step
/// and returns `false` to stop.
#[allow(clippy::too_many_arguments)]
pub fn dopri5<const N: usize, F, H, O>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    tol: Tolerance,
    limits: StepLimits,
    h_cap: H,
    mut observer: O,
) -> Outcome<N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    H: Fn(f64) -> f64,
    O: FnMut(f64, &[f64; N]) -> bool,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut accepted = 0;
    let mut rejected = 0;
    if !all_finite(&k1) || !all_finite(&y) {
        return Outcome { t, y, status: Status::NonFinite, accepted, rejected };
    }
    let mut h = if limits.h_init > 0.0 {
        limits.h_init
    } else {
        (span * 1e-3).min(h_cap(t)).max(f64::MIN_POSITIVE)
    };

    loop {
        if (t_end - t) * dir <= 0.0 {
            return Outcome { t, y, status: Status::Finished, accepted, rejected };
        }
        if accepted + rejected >= limits.max_steps {
            return Outcome { t, y, status: Status::MaxSteps, accepted, rejected };
        }
        h = h.min(h_cap(t)).min((t_end - t).abs());
        let h_min = limits.h_min_rel * t.abs().max(1e-300);
        if h < h_min {
            return Outcome { t, y, status: Status::StepCollapse, accepted, rejected };
        }
        let hs = dir * h;

        let k2 = f(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = f(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * hs,
            &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + hs,
            &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + hs, &y_new);

        let mut err = [0.0; N];
        for i in 0..N {
            err[i] = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let finite = all_finite(&y_new) && all_finite(&k7) && all_finite(&err);
        let en = if finite { error_norm(&err, &y, &y_new, tol) } else { f64::INFINITY };

        if en <= 1.0 {
            t += hs;
            y = y_new;
            k1 = k7;
            accepted += 1;
            let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
            if !observer(t, &y) {
                return Outcome { t, y, status: Status::Stopped, accepted, rejected };
            }
        } else {
            rejected += 1;
            let fac = if en.is_finite() { (0.9 * en.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h *= fac;
        }
    }
}
