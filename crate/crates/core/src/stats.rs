//! Small statistics helpers shared by the estimators and the sweeps.

use serde::{Deserialize, Serialize};

/// A point estimate with its one-sigma standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(value: f64, stderr: f64) -> Self {
        Self { value, stderr }
    }

    /// Binomial proportion `successes / trials` with stderr `sqrt(p(1-p)/n)`.
    ///
    /// Counts may exceed `trials` when they are photon-event counts; the
    /// variance term is clamped at zero in that case.
    pub fn proportion(successes: u64, trials: u64) -> Option<Self> {
        if trials == 0 {
            return None;
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let var = (p * (1.0 - p)).max(0.0) / n;
        Some(Self::new(p, var.sqrt()))
    }

    /// Relative standard error, or infinity when the value is zero.
    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            f64::INFINITY
        } else {
            (self.stderr / self.value).abs()
        }
    }

    /// Number of standard errors separating `self` from `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.value == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - target).abs() / self.stderr
        }
    }
}

/// Inverse-variance weighted mean of the estimates. Entries with zero
/// stderr are skipped.
pub fn weighted_mean(estimates: &[Estimate]) -> Option<Estimate> {
    let (mut wsum, mut vsum) = (0.0, 0.0);
    for e in estimates.iter().filter(|e| e.stderr > 0.0 && e.stderr.is_finite()) {
        let w = 1.0 / (e.stderr * e.stderr);
        wsum += w;
        vsum += w * e.value;
    }
    (wsum > 0.0).then(|| Estimate::new(vsum / wsum, wsum.recip().sqrt()))
}

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination.
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Full width at half maximum of a sampled peak, using linear
/// interpolation between grid points. Returns `(argmax, peak, fwhm)`.
pub fn peak_and_fwhm(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return None;
    }
    let (imax, &peak) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    if peak <= 0.0 {
        return None;
    }
    let half = peak / 2.0;
    let cross = |i: usize, j: usize| {
        let (x0, x1, y0, y1) = (xs[i], xs[j], ys[i], ys[j]);
        x0 + (half - y0) * (x1 - x0) / (y1 - y0)
    };
    let left = (1..=imax).rev().find(|&i| ys[i - 1] < half).map(|i| cross(i - 1, i))?;
    let right = (imax..xs.len() - 1)
        .find(|&i| ys[i + 1] < half)
        .map(|i| cross(i, i + 1))?;
    Some((xs[imax], peak, right - left))
}
