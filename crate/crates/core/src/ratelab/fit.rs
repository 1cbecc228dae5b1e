#[allow(unused_imports)]
use num_traits::Float;

use super::experiment::MeasureCurve;
use crate::error::{bail, Result};

/// Least-squares fit of `log |m(n) - limit|` against `log n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub predicted_exponent: f64,
}

impl RateFit {
    /// Whether the slope lies within `band` of the predicted exponent.
    pub fn within(&self, band: f64) -> bool {
        (self.slope - self.predicted_exponent).abs() <= band
    }
}

pub const MIN_FIT_POINTS: usize = 4;

pub fn fit_log_slope(
    ns: &[f64],
    values: &[f64],
    limit: f64,
    predicted_exponent: f64,
) -> Result<RateFit> {
    if ns.len() != values.len() {
        bail!(
            Precondition,
            "{} sample sizes but {} values",
            ns.len(),
            values.len()
        );
    }
    if ns.len() < MIN_FIT_POINTS {
        bail!(
            Precondition,
            "a rate fit needs at least {MIN_FIT_POINTS} points, got {}",
            ns.len()
        );
    }
    let mut xs = alloc::vec::Vec::with_capacity(ns.len());
    let mut ys = alloc::vec::Vec::with_capacity(ns.len());
    for (&n, &m) in ns.iter().zip(values) {
        let gap = (m - limit).abs();
        if !(gap > 0.0 && gap.is_finite() && n > 0.0) {
            bail!(
                DegenerateFit,
                "cannot take logs at n = {n}: |m - limit| = {gap:e}"
            );
        }
        xs.push(n.ln());
        ys.push(gap.ln());
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if !(sxx > 0.0) {
        bail!(DegenerateFit, "all sample sizes coincide");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let slope_stderr = (sse.max(0.0) / (k - 2.0) / sxx).sqrt();
    Ok(RateFit {
        slope,
        slope_stderr,
        intercept,
        r_squared,
        predicted_exponent,
    })
}

/// Fits the replication medians of `|measure - limit|` of a curve.
pub fn fit_curve(curve: &MeasureCurve, limit: f64, predicted_exponent: f64) -> Result<RateFit> {
    fit_log_slope(
        &curve.ns(),
        &curve.deviation_medians(limit),
        0.0,
        predicted_exponent,
    )
}
