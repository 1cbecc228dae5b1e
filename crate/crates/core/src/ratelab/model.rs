use alloc::sync::Arc;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Exp, LogNormal, Normal};

use crate::error::{bail, Error, Result};
use crate::posteriors::{gamma_update, grid_posterior, normal_update, Posterior};

/// The law `Q` the observations are drawn from. It need not belong to the
/// fitted family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrueSampler {
    Normal { mean: f64, sd: f64 },
    Exponential { rate: f64 },
    LogNormal { mu: f64, sigma: f64 },
}

impl TrueSampler {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TrueSampler::Normal { mean, sd } => mean.is_finite() && sd > 0.0 && sd.is_finite(),
            TrueSampler::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            TrueSampler::LogNormal { mu, sigma } => {
                mu.is_finite() && sigma > 0.0 && sigma.is_finite()
            }
        };
        if !ok {
            bail!(Domain, "invalid sampler parameters {self:?}");
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        match *self {
            TrueSampler::Normal { mean, sd } => {
                let d = Normal::new(mean, sd).expect("validated normal sampler");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            TrueSampler::Exponential { rate } => {
                let d = Exp::new(rate).expect("validated exponential sampler");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            TrueSampler::LogNormal { mu, sigma } => {
                let d = LogNormal::new(mu, sigma).expect("validated lognormal sampler");
                (0..n).map(|_| d.sample(rng)).collect()
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            TrueSampler::Normal { mean, .. } => mean,
            TrueSampler::Exponential { rate } => 1.0 / rate,
            TrueSampler::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            TrueSampler::Normal { sd, .. } => sd * sd,
            TrueSampler::Exponential { rate } => 1.0 / (rate * rate),
            TrueSampler::LogNormal { mu, sigma } => {
                ((sigma * sigma).exp() - 1.0) * (2.0 * mu + sigma * sigma).exp()
            }
        }
    }
}

pub type LogLikelihood = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type Estimator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A user-supplied family fitted on a grid.
#[derive(Clone)]
pub struct CustomFamily {
    pub prior_log_density: crate::losses::ScalarFn,
    pub log_likelihood: LogLikelihood,
    pub mle: Estimator,
    pub support: (f64, f64),
    pub resolution: usize,
}

/// The parametric family and prior the posterior is computed under.
#[derive(Clone)]
pub enum ModelFamily {
    /// `N(sigma, 1/precision)` observations with a `N(prior_mean, 1/prior_precision)` prior.
    NormalKnownPrecision {
        precision: f64,
        prior_mean: f64,
        prior_precision: f64,
    },
    /// Exponential observations with rate `sigma` and the prior `1/sigma`.
    Exponential,
    Custom(CustomFamily),
}

impl core::fmt::Debug for ModelFamily {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ModelFamily::NormalKnownPrecision {
                precision,
                prior_mean,
                prior_precision,
            } => f
                .debug_struct("NormalKnownPrecision")
                .field("precision", precision)
                .field("prior_mean", prior_mean)
                .field("prior_precision", prior_precision)
                .finish(),
            ModelFamily::Exponential => f.write_str("Exponential"),
            ModelFamily::Custom(c) => f
                .debug_struct("Custom")
                .field("support", &c.support)
                .finish(),
        }
    }
}

impl ModelFamily {
    pub fn label(&self) -> &'static str {
        match self {
            ModelFamily::NormalKnownPrecision { .. } => "normal-known-precision",
            ModelFamily::Exponential => "exponential",
            ModelFamily::Custom(_) => "custom",
        }
    }
}

/// Data-generating law, fitted family, and the limit objects of the maximum
/// likelihood estimator: its limit `theta` and the asymptotic variance
/// `i_theta` of `sqrt(n) (theta_n - theta)`.
#[derive(Debug, Clone)]
pub struct SamplingModel {
    pub sampler: TrueSampler,
    pub family: ModelFamily,
    pub theta: f64,
    pub i_theta: f64,
    /// Second moment of the standardized limit law of `sqrt(n) (sigma - theta_n)`
    /// under the posterior, in units of `i_theta`.
    pub second_moment: f64,
}

impl SamplingModel {
    /// Correctly specified normal model with known precision.
    pub fn normal(
        theta: f64,
        precision: f64,
        prior_mean: f64,
        prior_precision: f64,
    ) -> Result<Self> {
        let sampler = TrueSampler::Normal {
            mean: theta,
            sd: 1.0 / precision.sqrt(),
        };
        Self::fit(
            sampler,
            ModelFamily::NormalKnownPrecision {
                precision,
                prior_mean,
                prior_precision,
            },
        )
    }

    /// Correctly specified exponential model with rate `theta`.
    pub fn exponential(theta: f64) -> Result<Self> {
        Self::fit(
            TrueSampler::Exponential { rate: theta },
            ModelFamily::Exponential,
        )
    }

    /// Fits `family` to data from `sampler`, possibly misspecified. `theta` is
    /// the limit of the maximum likelihood estimator under the sampler and
    /// `i_theta` the sandwich variance.
    pub fn fit(sampler: TrueSampler, family: ModelFamily) -> Result<Self> {
        sampler.validate()?;
        let (m, v) = (sampler.mean(), sampler.variance());
        let (theta, i_theta, second_moment) = match &family {
            ModelFamily::NormalKnownPrecision {
                precision,
                prior_precision,
                ..
            } => {
                if !(*precision > 0.0 && *prior_precision > 0.0) {
                    bail!(Domain, "normal model needs positive precisions");
                }
                (m, v, 1.0 / (precision * v))
            }
            ModelFamily::Exponential => {
                if !(m > 0.0) {
                    bail!(
                        Domain,
                        "exponential model needs a positive sampler mean, got {m}"
                    );
                }
                let theta = 1.0 / m;
                (theta, theta.powi(4) * v, 1.0 / (theta * theta * v))
            }
            ModelFamily::Custom(_) => {
                bail!(
                    Precondition,
                    "custom families need theta and i_theta supplied through SamplingModel::custom"
                )
            }
        };
        Ok(Self {
            sampler,
            family,
            theta,
            i_theta,
            second_moment,
        })
    }

    /// A model with user-supplied limit objects.
    pub fn custom(
        sampler: TrueSampler,
        family: ModelFamily,
        theta: f64,
        i_theta: f64,
        second_moment: f64,
    ) -> Result<Self> {
        sampler.validate()?;
        if !(i_theta > 0.0 && second_moment > 0.0) {
            bail!(Domain, "i_theta and the second moment must be positive");
        }
        Ok(Self {
            sampler,
            family,
            theta,
            i_theta,
            second_moment,
        })
    }

    pub fn with_i_theta(mut self, i_theta: f64) -> Self {
        self.i_theta = i_theta;
        self
    }

    pub fn with_second_moment(mut self, m2: f64) -> Self {
        self.second_moment = m2;
        self
    }

    pub fn posterior(&self, data: &[f64]) -> Result<Posterior> {
        match &self.family {
            ModelFamily::NormalKnownPrecision {
                precision,
                prior_mean,
                prior_precision,
            } => Ok(normal_update(*prior_mean, *prior_precision, *precision, data)?.into()),
            ModelFamily::Exponential => Ok(gamma_update(data)?.into()),
            ModelFamily::Custom(c) => {
                let (prior, lik) = (c.prior_log_density.clone(), c.log_likelihood.clone());
                Ok(grid_posterior(
                    |s| prior(s),
                    |s, x: &f64| lik(s, *x),
                    data,
                    c.support,
                    c.resolution,
                )?
                .into())
            }
        }
    }

    /// Maximum likelihood estimate `theta_n`.
    pub fn mle(&self, data: &[f64]) -> Result<f64> {
        if data.is_empty() {
            bail!(Domain, "the estimator needs at least one observation");
        }
        let n = data.len() as f64;
        let sum: f64 = data.iter().sum();
        match &self.family {
            ModelFamily::NormalKnownPrecision { .. } => Ok(sum / n),
            ModelFamily::Exponential => {
                if !(sum > 0.0) {
                    return Err(Error::Domain(alloc::format!(
                        "exponential estimator needs positive data, sum = {sum}"
                    )));
                }
                Ok(n / sum)
            }
            ModelFamily::Custom(c) => Ok((c.mle)(data)),
        }
    }
}
