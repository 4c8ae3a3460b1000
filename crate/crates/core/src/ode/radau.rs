use super::{all_finite, error_norm, Outcome, Status, StepLimits, Tolerance};
use crate::linalg::solve_dense;

const SQ6: f64 = 2.449_489_742_783_178;

fn nodes() -> [f64; 3] {
    [(4.0 - SQ6) / 10.0, (4.0 + SQ6) / 10.0, 1.0]
}

fn coefficients() -> [[f64; 3]; 3] {
    [
        [(88.0 - 7.0 * SQ6) / 360.0, (296.0 - 169.0 * SQ6) / 1800.0, (-2.0 + 3.0 * SQ6) / 225.0],
        [(296.0 + 169.0 * SQ6) / 1800.0, (88.0 + 7.0 * SQ6) / 360.0, (-2.0 - 3.0 * SQ6) / 225.0],
        [(16.0 - SQ6) / 36.0, (16.0 + SQ6) / 36.0, 1.0 / 9.0],
    ]
}

/// One Radau IIA step of signed size `h`. Returns `None` when Newton fails.
fn step<const N: usize, F, J>(
    f: &mut F,
    jac: &mut J,
    t: f64,
    y: &[f64; N],
    h: f64,
    tol: Tolerance,
) -> Option<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    J: FnMut(f64, &[f64; N]) -> [[f64; N]; N],
{
    let c = nodes();
    let a = coefficients();
    let n3 = 3 * N;
    let mut z = [[0.0; N]; 3];
    let mut prev_norm = f64::INFINITY;
    let mut mat = vec![0.0; n3 * n3];
    let mut rhs = vec![0.0; n3];

    for iter in 0..12 {
        let mut fs = [[0.0; N]; 3];
        let mut js = [[[0.0; N]; N]; 3];
        for s in 0..3 {
            let mut ys = *y;
            for i in 0..N {
                ys[i] += z[s][i];
            }
            fs[s] = f(t + c[s] * h, &ys);
            js[s] = jac(t + c[s] * h, &ys);
            if !all_finite(&fs[s]) {
                return None;
            }
        }
        // residual G_s = z_s - h Σ_r a_sr f_r, Jacobian I - h a_sr J_r
        mat.iter_mut().for_each(|v| *v = 0.0);
        for s in 0..3 {
            for i in 0..N {
                let row = s * N + i;
                let mut g = z[s][i];
                for r in 0..3 {
                    g -= h * a[s][r] * fs[r][i];
                    for k in 0..N {
                        mat[row * n3 + r * N + k] -= h * a[s][r] * js[r][i][k];
                    }
                }
                mat[row * n3 + row] += 1.0;
                rhs[row] = -g;
            }
        }
        if !solve_dense(&mut mat, &mut rhs, n3) {
            return None;
        }
        let mut norm: f64 = 0.0;
        for s in 0..3 {
            for i in 0..N {
                let dz = rhs[s * N + i];
                z[s][i] += dz;
                let sc = tol.atol + tol.rtol * y[i].abs().max((y[i] + z[s][i]).abs());
                norm = norm.max((dz / sc).abs());
            }
        }
        if !norm.is_finite() {
            return None;
        }
        if norm < 1e-3 {
            let mut out = *y;
            for i in 0..N {
                out[i] += z[2][i];
            }
            return if all_finite(&out) { Some(out) } else { None };
        }
        if iter > 2 && norm > prev_norm {
            return None;
        }
        prev_norm = norm;
    }
    None
}

/// Radau IIA (order 5) with step-doubling error control.
///
/// The accepted state is the two-half-step result; the difference to the
/// full step, divided by `2^5 - 1`, is the local error estimate.
#[allow(clippy::too_many_arguments)]
pub fn radau5<const N: usize, F, J, H, O>(
    mut f: F,
    mut jac: J,
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
    J: FnMut(f64, &[f64; N]) -> [[f64; N]; N],
    H: Fn(f64) -> f64,
    O: FnMut(f64, &[f64; N]) -> bool,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut accepted = 0;
    let mut rejected = 0;
    if !all_finite(&y) {
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

        let full = step(&mut f, &mut jac, t, &y, hs, tol);
        let half = full.and_then(|_| step(&mut f, &mut jac, t, &y, 0.5 * hs, tol));
        let two = half.and_then(|ym| step(&mut f, &mut jac, t + 0.5 * hs, &ym, 0.5 * hs, tol));

        let (Some(full), Some(two)) = (full, two) else {
            rejected += 1;
            h *= 0.25;
            continue;
        };
        let mut err = [0.0; N];
        for i in 0..N {
            err[i] = (two[i] - full[i]) / 31.0;
        }
        let en = error_norm(&err, &y, &two, tol);
        if en <= 1.0 {
            t += hs;
            y = two;
            accepted += 1;
            let fac = if en == 0.0 { 4.0 } else { (0.9 * en.powf(-1.0 / 6.0)).clamp(0.2, 4.0) };
            h *= fac;
            if !observer(t, &y) {
                return Outcome { t, y, status: Status::Stopped, accepted, rejected };
            }
        } else {
            rejected += 1;
            let fac = if en.is_finite() { (0.9 * en.powf(-1.0 / 6.0)).clamp(0.1, 0.9) } else { 0.1 };
            h *= fac;
        }
    }
}
