//! Least-squares power-law fits in log-log coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Result of fitting `y ≈ prefactor · x^slope`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub slope: f64,
    pub prefactor: f64,
    pub r2: f64,
    pub n: usize,
}

/// Ordinary least squares on `(ln x, ln y)`.
///
/// Every `x` and `y` must be strictly positive and finite; at least two
/// distinct abscissae are required.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerFit> {
    if xs.len() != ys.len() {
        return Err(Error::Domain(format!(
            "fit_power_law: {} abscissae vs {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(ys.len());
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(Error::Domain(format!(
                "fit_power_law: nonpositive or nonfinite sample ({x}, {y})"
            )));
        }
        lx.push(x.ln());
        ly.push(y.ln());
    }
    let (slope, intercept, r2) = linear_fit(&lx, &ly)?;
    Ok(PowerFit {
        slope,
        prefactor: intercept.exp(),
        r2,
        n: lx.len(),
    })
}

/// Returns `(slope, intercept, r²)` of the least-squares line through the points.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::Domain(format!("linear_fit needs >= 2 points, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return Err(Error::Domain("linear_fit: abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok((slope, intercept, r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_is_recovered() {
        let xs: Vec<f64> = (1..50).map(|i| i as f64 * 3.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x.powf(-4.0)).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert!((fit.slope + 4.0).abs() < 1e-12);
        assert!((fit.prefactor - 2.5).abs() < 1e-10);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_zeros() {
        assert!(fit_power_law(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(fit_power_law(&[1.0], &[1.0]).is_err());
    }
}
