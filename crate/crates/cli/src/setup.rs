//! Turns a [`RunConfig`] into core objects. Everything here runs before any
//! computation, so its failures are configuration errors.

use robust_bayes_core::decision::Interval;
use robust_bayes_core::losses::{
    asymmetric_quadratic_class, constant_zero, half_squared_error, make_dam_losses,
    smooth_translation_class, FiniteClass,
};
use robust_bayes_core::ratelab::{Measure, ModelFamily, SamplingModel, TrueSampler};
use robust_bayes_core::{Loss, LossClass};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const DEFAULT_PRIOR_PRECISION: f64 = 0.01;
pub const DEFAULT_SLOPE_BAND: f64 = 0.05;
pub const DEFAULT_ETA: [f64; 3] = [0.05, 0.1, 0.5];

fn model_keys_required(cfg: &RunConfig) -> Vec<&'static str> {
    let mut keys = vec!["model.family"];
    if !cfg.contains("model.sampler") {
        keys.push("model.theta");
    }
    keys
}

pub fn sampler_from(cfg: &RunConfig, kind: &str) -> CliResult<TrueSampler> {
    let need = |key: &str| -> CliResult<f64> {
        cfg.f64(key)?
            .ok_or_else(|| CliError::config(format!("model.sampler = {kind} needs `{key}`")))
    };
    let sampler = match kind {
        "normal" => TrueSampler::Normal {
            mean: need("model.sampler_mean")?,
            sd: need("model.sampler_sd")?,
        },
        "exponential" => TrueSampler::Exponential {
            rate: need("model.sampler_rate")?,
        },
        "lognormal" => TrueSampler::LogNormal {
            mu: need("model.sampler_mu")?,
            sigma: need("model.sampler_sigma")?,
        },
        other => {
            return Err(CliError::config(format!(
                "unknown model.sampler `{other}` (normal, exponential, lognormal)"
            )))
        }
    };
    sampler.validate().map_err(CliError::config)?;
    Ok(sampler)
}

/// The sampling model. Without `model.sampler` the data come from the fitted
/// family at `model.theta`; with it the model may be misspecified and `theta`
/// is the limit of the estimator under the sampler.
pub fn model_from(cfg: &RunConfig) -> CliResult<SamplingModel> {
    cfg.require(&model_keys_required(cfg))?;
    let family_name = cfg.str("model.family").unwrap_or_default();
    let precision = cfg.f64_or("model.precision", 1.0)?;
    let family = match family_name {
        "normal" | "normal-known-precision" => ModelFamily::NormalKnownPrecision {
            precision,
            prior_mean: cfg.f64_or("model.prior_mean", 0.0)?,
            prior_precision: cfg.f64_or("model.prior_precision", DEFAULT_PRIOR_PRECISION)?,
        },
        "exponential" => ModelFamily::Exponential,
        other => {
            return Err(CliError::config(format!(
                "unknown model.family `{other}` (normal, exponential)"
            )))
        }
    };
    let model = match cfg.str("model.sampler") {
        Some(kind) => SamplingModel::fit(sampler_from(cfg, kind)?, family),
        None => {
            let theta = cfg.f64("model.theta")?.unwrap_or_default();
            match family {
                ModelFamily::NormalKnownPrecision {
                    prior_mean,
                    prior_precision,
                    ..
                } => SamplingModel::normal(theta, precision, prior_mean, prior_precision),
                _ => SamplingModel::exponential(theta),
            }
        }
    }
    .map_err(CliError::config)?;
    Ok(match cfg.f64("model.i_theta")? {
        Some(i) if i > 0.0 => model.with_i_theta(i),
        Some(i) => {
            return Err(CliError::config(format!(
                "model.i_theta must be positive, got {i}"
            )))
        }
        None => model,
    })
}

/// A loss class with its reference loss and Bayes-action search interval.
#[derive(Debug)]
pub struct ClassSpec {
    pub kind: String,
    pub class: LossClass,
    pub reference: Option<Loss>,
    pub bracket: Option<Interval>,
}

pub fn class_from(cfg: &RunConfig) -> CliResult<ClassSpec> {
    cfg.require(&["class.kind"])?;
    let kind = cfg.str("class.kind").unwrap_or_default().to_string();
    let (class, reference, mut bracket): (LossClass, Option<Loss>, Option<Interval>) =
        match kind.as_str() {
            "asymmetric" => {
                let (k1, k2) = (cfg.f64_or("class.k1", 1.0)?, cfg.f64_or("class.k2", 2.0)?);
                (
                    asymmetric_quadratic_class(k1, k2)
                        .map_err(CliError::config)?
                        .into(),
                    Some(half_squared_error()),
                    None,
                )
            }
            "smooth" => (
                smooth_translation_class().map_err(CliError::config)?.into(),
                Some(half_squared_error()),
                None,
            ),
            "dam" | "dam-envelope" => {
                let dam = make_dam_losses().map_err(CliError::config)?;
                let class = if kind == "dam" {
                    dam.finite.into()
                } else {
                    dam.envelope.into()
                };
                (class, Some(dam.reference), Some((0.0, 30.0)))
            }
            "constant" => (
                FiniteClass::new(vec![constant_zero()])
                    .map_err(CliError::config)?
                    .into(),
                None,
                None,
            ),
            other => {
                return Err(CliError::config(format!(
                "unknown class.kind `{other}` (asymmetric, smooth, dam, dam-envelope, constant)"
            )))
            }
        };
    match (cfg.f64("class.bracket_lo")?, cfg.f64("class.bracket_hi")?) {
        (Some(lo), Some(hi)) if lo < hi => bracket = Some((lo, hi)),
        (None, None) => {}
        _ => {
            return Err(CliError::config(
                "class.bracket_lo and class.bracket_hi must be given together with lo < hi",
            ))
        }
    }
    Ok(ClassSpec {
        kind,
        class,
        reference,
        bracket,
    })
}

pub fn measure_from(cfg: &RunConfig) -> CliResult<Measure> {
    let name = cfg.str("experiment.measure").unwrap_or("diameter");
    Measure::parse(name).ok_or_else(|| {
        CliError::config(format!(
            "unknown experiment.measure `{name}` (diameter, sup-regret, range)"
        ))
    })
}

pub fn n_grid_from(cfg: &RunConfig) -> CliResult<Vec<usize>> {
    let grid = cfg
        .usize_list("experiment.n_grid")?
        .unwrap_or_else(|| robust_bayes_core::ratelab::experiment::DEFAULT_N_GRID.to_vec());
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::config(format!(
            "experiment.n_grid must be positive and strictly increasing, got {grid:?}"
        )));
    }
    Ok(grid)
}

pub fn replications_from(cfg: &RunConfig) -> CliResult<usize> {
    match cfg.usize("experiment.replications")? {
        Some(0) => Err(CliError::config(
            "experiment.replications must be at least 1",
        )),
        Some(r) => Ok(r),
        None => Ok(robust_bayes_core::ratelab::experiment::DEFAULT_REPLICATIONS),
    }
}
