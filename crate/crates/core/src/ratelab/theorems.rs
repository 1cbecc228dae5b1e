//! Desk-scale checks of the large-sample theorems: posterior expansions of
//! `int f d pi_n`, the smooth versus kinked diameter contrast, and first
//! moment checks of limit laws.

use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::experiment::{
    simulate_measure_curve, simulate_with, CurvePoint, Executor, ExperimentConfig, Measure,
    MeasureCurve,
};
use super::fit::{fit_log_slope, RateFit};
use super::model::{ModelFamily, SamplingModel};
use crate::decision::action_set;
use crate::error::{bail, Result};
use crate::losses::{asymmetric_quadratic_class, smooth_translation_class, LossClass};
use crate::robustness::l_f;

/// Tolerance of the `f(theta) = 0` and vanishing-gradient preconditions.
pub const PRECONDITION_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-6;

pub type TestFn<'a> = &'a (dyn Fn(f64) -> f64 + Sync + Send);

/// Replication medians of a scaled residual across the grid. Passes when the
/// median at the largest `n` is at most half the median at the smallest.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendReport {
    pub label: String,
    pub curve: MeasureCurve,
    pub first_median: f64,
    pub last_median: f64,
    pub pass: bool,
}

impl TrendReport {
    fn from_curve(curve: MeasureCurve) -> Self {
        let first_median = curve.points.first().map_or(f64::NAN, |p| p.median);
        let last_median = curve.points.last().map_or(f64::NAN, |p| p.median);
        Self {
            label: curve.label.clone(),
            pass: last_median <= 0.5 * first_median,
            first_median,
            last_median,
            curve,
        }
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.curve.points
    }
}

fn check_vanishes(f: TestFn<'_>, theta: f64) -> Result<()> {
    let v = f(theta);
    if !(v.abs() <= PRECONDITION_TOL) {
        bail!(
            Precondition,
            "the test function must vanish at theta = {theta}, got {v:e}"
        );
    }
    Ok(())
}

fn central_gradient(f: TestFn<'_>, theta: f64) -> f64 {
    (f(theta + FD_STEP) - f(theta - FD_STEP)) / (2.0 * FD_STEP)
}

/// First-order expansion: median over replications of
/// `sqrt(n) |int f d pi_n - g (theta_n - theta)|` with `g = f'(theta)`.
pub fn verify_thm81<E: Executor>(
    model: &SamplingModel,
    f: TestFn<'_>,
    gradient_at_theta: f64,
    config: &ExperimentConfig,
    exec: &E,
) -> Result<TrendReport> {
    let theta = model.theta;
    check_vanishes(f, theta)?;
    let fd = central_gradient(f, theta);
    if (fd - gradient_at_theta).abs() > 1e-4 * (1.0 + gradient_at_theta.abs()) {
        bail!(
            Precondition,
            "supplied gradient {gradient_at_theta} disagrees with the difference quotient {fd}"
        );
    }
    let curve = simulate_with("first-order expansion", config, exec, |n, rng| {
        let data = model.sampler.sample(rng, n);
        let post = model.posterior(&data)?;
        let integral = post.expectation(f)?;
        let theta_n = model.mle(&data)?;
        Ok((n as f64).sqrt() * (integral - gradient_at_theta * (theta_n - theta)).abs())
    })?;
    Ok(TrendReport::from_curve(curve))
}

/// Second-order expansion for `f` with `f(theta) = 0` and `f'(theta) = 0`:
/// median of `n |int f d pi_n - H (theta_n - theta)^2 / 2 - L_f / (2n)|`.
pub fn verify_thm82<E: Executor>(
    model: &SamplingModel,
    f: TestFn<'_>,
    hessian_at_theta: f64,
    config: &ExperimentConfig,
    exec: &E,
) -> Result<TrendReport> {
    let theta = model.theta;
    check_vanishes(f, theta)?;
    let g = central_gradient(f, theta);
    if !(g.abs() <= PRECONDITION_TOL) {
        bail!(
            Precondition,
            "the test function must be stationary at theta, gradient {g:e}"
        );
    }
    let lf = l_f(hessian_at_theta, model.i_theta, model.second_moment);
    let curve = simulate_with("second-order expansion", config, exec, |n, rng| {
        let data = model.sampler.sample(rng, n);
        let post = model.posterior(&data)?;
        let integral = post.expectation(f)?;
        let e = model.mle(&data)? - theta;
        let nf = n as f64;
        Ok(nf * (integral - 0.5 * hessian_at_theta * e * e - 0.5 * lf / nf).abs())
    })?;
    Ok(TrendReport::from_curve(curve))
}

/// Diameter curves of the kinked asymmetric quadratic class and of its smooth
/// counterpart, each multiplied by `sqrt(lambda_n / lambda)`, the square root
/// of the effective sample size of the normal posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothContrast {
    pub ns: Vec<f64>,
    pub kinked_scaled: Vec<f64>,
    pub smooth_scaled: Vec<f64>,
    /// `None` when the kinked diameters vanish (equal weights).
    pub kinked_fit: Option<RateFit>,
    pub smooth_fit: Option<RateFit>,
}

impl SmoothContrast {
    /// Largest relative deviation of the scaled kinked curve from its first value.
    pub fn kinked_spread(&self) -> f64 {
        let first = self.kinked_scaled[0];
        let scale = first.abs().max(f64::MIN_POSITIVE);
        self.kinked_scaled
            .iter()
            .map(|v| (v - first).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// Scaled smooth diameter at the largest `n` over its value at the smallest.
    pub fn smooth_ratio(&self) -> f64 {
        self.smooth_scaled[self.smooth_scaled.len() - 1] / self.smooth_scaled[0]
    }
}

pub fn smooth_vs_nonsmooth_demo<E: Executor>(
    model: &SamplingModel,
    k1: f64,
    k2: f64,
    config: &ExperimentConfig,
    exec: &E,
) -> Result<SmoothContrast> {
    let ModelFamily::NormalKnownPrecision {
        precision,
        prior_precision,
        ..
    } = model.family
    else {
        bail!(
            Precondition,
            "the smooth/kinked contrast needs the normal known-precision model"
        );
    };
    let kinked: LossClass = asymmetric_quadratic_class(k1, k2)?.into();
    let smooth: LossClass = smooth_translation_class()?.into();
    let cfg = ExperimentConfig {
        measure: Measure::Diameter,
        ..config.clone()
    };
    let scale = |n: f64| ((prior_precision + n * precision) / precision).sqrt();
    let trace = |class: &LossClass| -> Result<Vec<f64>> {
        let curve = simulate_measure_curve(model, class, None, &cfg, exec)?;
        Ok(curve
            .points
            .iter()
            .map(|p| scale(p.n as f64) * p.median)
            .collect())
    };
    let ns: Vec<f64> = cfg.n_grid.iter().map(|&n| n as f64).collect();
    let kinked_scaled = trace(&kinked)?;
    let smooth_scaled = trace(&smooth)?;
    let raw = |scaled: &[f64]| -> Vec<f64> {
        scaled.iter().zip(&ns).map(|(v, &n)| v / scale(n)).collect()
    };
    let kinked_fit = fit_log_slope(&ns, &raw(&kinked_scaled), 0.0, -0.5).ok();
    let smooth_fit = fit_log_slope(&ns, &raw(&smooth_scaled), 0.0, -1.0).ok();
    Ok(SmoothContrast {
        ns,
        kinked_scaled,
        smooth_scaled,
        kinked_fit,
        smooth_fit,
    })
}

/// Mean of a replicated statistic with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    pub target: f64,
    pub mean: f64,
    pub stderr: f64,
    pub replications: usize,
}

impl MomentCheck {
    fn from_values(values: &[f64], target: f64) -> Self {
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0).max(1.0);
        Self {
            target,
            mean,
            stderr: (var / k).sqrt(),
            replications: values.len(),
        }
    }

    /// `|mean - target|` in standard errors.
    pub fn z_score(&self) -> f64 {
        (self.mean - self.target).abs() / self.stderr
    }

    pub fn within(&self, standard_errors: f64) -> bool {
        (self.mean - self.target).abs() <= standard_errors * self.stderr
    }
}

fn replicate<E, F>(n: usize, replications: usize, seed: u64, exec: &E, job: F) -> Result<Vec<f64>>
where
    E: Executor,
    F: Fn(usize, &mut rand_chacha::ChaCha8Rng) -> Result<f64> + Sync + Send,
{
    let cfg = ExperimentConfig::new(alloc::vec![n], replications, seed, Measure::Diameter);
    Ok(simulate_with("replicate", &cfg, exec, job)?.values_at(0))
}

/// Mean of the estimator over replications at sample size `n` against `theta`.
pub fn estimator_concentration<E: Executor>(
    model: &SamplingModel,
    n: usize,
    replications: usize,
    seed: u64,
    exec: &E,
) -> Result<MomentCheck> {
    let values = replicate(n, replications, seed, exec, |n, rng| {
        model.mle(&model.sampler.sample(rng, n))
    })?;
    Ok(MomentCheck::from_values(&values, model.theta))
}

/// Mean of `sqrt(n) (diameter_n - limit_diameter)` over replications at the
/// largest sample size of `config`, which is centered in the limit.
pub fn diameter_law_check<E: Executor>(
    model: &SamplingModel,
    class: &LossClass,
    limit_diameter: f64,
    config: &ExperimentConfig,
    exec: &E,
) -> Result<MomentCheck> {
    config.validate()?;
    let n = config.n_grid[config.n_grid.len() - 1];
    let root_n = (n as f64).sqrt();
    let bracket = config.bracket;
    let values = replicate(
        n,
        config.replications,
        config.master_seed,
        exec,
        |n, rng| {
            let post = model.posterior(&model.sampler.sample(rng, n))?;
            Ok(root_n * (action_set(class, &post, bracket)?.diameter() - limit_diameter))
        },
    )?;
    Ok(MomentCheck::from_values(&values, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratelab::experiment::Sequential;
    use crate::ratelab::model::TrueSampler;
    use crate::robustness::closed_form::AsymmetricQuadraticConstants;
    use crate::Error;

    fn small(grid: &[usize], reps: usize) -> ExperimentConfig {
        ExperimentConfig::new(grid.to_vec(), reps, 42, Measure::Diameter)
    }

    #[test]
    fn first_order_trend_normal_model() {
        let m = SamplingModel::normal(0.7, 1.0, 0.0, 1.0).unwrap();
        let theta = m.theta;
        let f = move |s: f64| s - theta;
        let rep = verify_thm81(&m, &f, 1.0, &small(&[50, 1600], 40), &Sequential).unwrap();
        assert!(rep.pass, "{rep:?}");
        // Posterior mean minus estimator is (lambda0 / lambda_n)(mu0 - theta_n).
        assert!(rep.last_median < 0.05);
    }

    #[test]
    fn zero_test_function_has_zero_residual() {
        let m = SamplingModel::exponential(2.0).unwrap();
        let zero = |_: f64| 0.0;
        let rep = verify_thm81(&m, &zero, 0.0, &small(&[20, 40], 5), &Sequential).unwrap();
        assert_eq!((rep.first_median, rep.last_median), (0.0, 0.0));
        assert!(rep.pass);
        let rep = verify_thm82(&m, &zero, 0.0, &small(&[20, 40], 5), &Sequential).unwrap();
        assert_eq!(rep.last_median, 0.0);
    }

    #[test]
    fn preconditions_are_enforced() {
        let m = SamplingModel::normal(0.0, 1.0, 0.0, 1.0).unwrap();
        let shifted = |s: f64| s - 1.0;
        assert!(matches!(
            verify_thm81(&m, &shifted, 1.0, &small(&[5, 6], 2), &Sequential),
            Err(Error::Precondition(_))
        ));
        let linear = |s: f64| s;
        assert!(matches!(
            verify_thm82(&m, &linear, 0.0, &small(&[5, 6], 2), &Sequential),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn second_order_trend_exponential_model() {
        let m = SamplingModel::exponential(0.5).unwrap();
        let f = |s: f64| (s - 0.5) * (s - 0.5);
        let rep = verify_thm82(&m, &f, 2.0, &small(&[50, 1600], 30), &Sequential).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn contrast_of_kinked_and_smooth_classes() {
        let m = SamplingModel::normal(0.0, 1.0, 0.0, 0.01).unwrap();
        let cfg = small(&[100, 1000, 10_000], 2);
        let c = smooth_vs_nonsmooth_demo(&m, 1.0, 2.0, &cfg, &Sequential).unwrap();
        let k = AsymmetricQuadraticConstants::new(1.0, 2.0).unwrap();
        assert!(c.kinked_spread() < 1e-6, "{c:?}");
        assert!((c.kinked_scaled[0] - (k.r2 - k.r1)).abs() < 1e-6);
        assert!(c.smooth_ratio() < 0.25, "{c:?}");
    }

    #[test]
    fn degenerate_weights_give_zero_diameter() {
        let m = SamplingModel::normal(0.0, 1.0, 0.0, 0.01).unwrap();
        let c = smooth_vs_nonsmooth_demo(&m, 1.0, 1.0, &small(&[10, 20, 40, 80], 1), &Sequential)
            .unwrap();
        assert!(c.kinked_scaled.iter().all(|v| *v == 0.0));
        assert!(c.kinked_fit.is_none());
    }

    #[test]
    fn estimator_is_centered() {
        let m = SamplingModel::exponential(0.5).unwrap();
        let c = estimator_concentration(&m, 2000, 100, 7, &Sequential).unwrap();
        assert!(c.within(3.0), "{c:?}");
        let m = SamplingModel::fit(
            TrueSampler::LogNormal {
                mu: 0.0,
                sigma: 0.3,
            },
            ModelFamily::Exponential,
        )
        .unwrap();
        let c = estimator_concentration(&m, 2000, 100, 7, &Sequential).unwrap();
        assert!(c.within(3.0), "{c:?}");
    }
}
