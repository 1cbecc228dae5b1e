use alloc::string::String;
use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::SamplingModel;
use crate::decision::{action_set, bayes_action, Interval};
use crate::error::{bail, Error, Result};
use crate::losses::{Loss, LossClass};
use crate::robustness::{range, reference_loss, sup_regret};

pub const DEFAULT_N_GRID: [usize; 6] = [50, 100, 200, 400, 800, 1600];
pub const DEFAULT_REPLICATIONS: usize = 200;
/// Largest tolerated share of failed replications at any sample size.
pub const MAX_FAILURE_SHARE: f64 = 0.05;

/// Which robustness measure a curve traces. Regret and range are evaluated
/// at the Bayes action of the reference loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Diameter,
    SupRegret,
    Range,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Diameter => "diameter",
            Measure::SupRegret => "sup-regret",
            Measure::Range => "range",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "diameter" => Some(Measure::Diameter),
            "sup-regret" | "sup_regret" | "regret" => Some(Measure::SupRegret),
            "range" => Some(Measure::Range),
            _ => None,
        }
    }

    /// Power of `n` at which the measure approaches its limit when the
    /// class members share a minimizer.
    pub fn predicted_exponent(self) -> f64 {
        match self {
            Measure::Diameter => -0.5,
            Measure::SupRegret | Measure::Range => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    pub measure: Measure,
    /// Search interval for Bayes actions; `None` uses the posterior default.
    pub bracket: Option<Interval>,
}

impl ExperimentConfig {
    pub fn new(
        n_grid: Vec<usize>,
        replications: usize,
        master_seed: u64,
        measure: Measure,
    ) -> Self {
        Self {
            n_grid,
            replications,
            master_seed,
            measure,
            bracket: None,
        }
    }

    pub fn with_bracket(mut self, bracket: Interval) -> Self {
        self.bracket = Some(bracket);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid[0] == 0 {
            bail!(
                Precondition,
                "the sample-size grid must be nonempty and positive"
            );
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            bail!(
                Precondition,
                "the sample-size grid must be strictly increasing: {:?}",
                self.n_grid
            );
        }
        if self.replications == 0 {
            bail!(Precondition, "at least one replication is required");
        }
        Ok(())
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::new(
            DEFAULT_N_GRID.to_vec(),
            DEFAULT_REPLICATIONS,
            42,
            Measure::Diameter,
        )
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one replication. Depends only on its grid position, never on
/// scheduling order.
pub fn replication_seed(master: u64, n_index: usize, replication: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ n_index as u64) ^ replication as u64)
}

pub fn replication_rng(master: u64, n_index: usize, replication: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(replication_seed(master, n_index, replication))
}

/// Runs independent jobs and returns their results in index order.
pub trait Executor {
    fn run<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn run<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(job).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub n: usize,
    pub replication: usize,
    /// `None` when the replication failed.
    pub value: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureCurve {
    pub label: String,
    pub rows: Vec<CurveRow>,
    pub points: Vec<CurvePoint>,
}

impl MeasureCurve {
    pub fn ns(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.n as f64).collect()
    }

    pub fn medians(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.median).collect()
    }

    /// Per grid point, the median over replications of `|value - limit|`.
    pub fn deviation_medians(&self, limit: f64) -> Vec<f64> {
        (0..self.points.len())
            .map(|i| {
                let dev: Vec<f64> = self
                    .values_at(i)
                    .iter()
                    .map(|v| (v - limit).abs())
                    .collect();
                median(&dev)
            })
            .collect()
    }

    /// Successful values at the `i`th grid point.
    pub fn values_at(&self, i: usize) -> Vec<f64> {
        let n = self.points[i].n;
        self.rows
            .iter()
            .filter(|r| r.n == n)
            .filter_map(|r| r.value)
            .collect()
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = p * (sorted.len() - 1) as f64;
    let lo = h as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

/// Generic driver: evaluates `job(n, rng)` for every grid point and
/// replication, then summarizes each grid point by median and quartiles.
pub fn simulate_with<E, F>(
    label: &str,
    config: &ExperimentConfig,
    exec: &E,
    job: F,
) -> Result<MeasureCurve>
where
    E: Executor,
    F: Fn(usize, &mut ChaCha8Rng) -> Result<f64> + Sync + Send,
{
    config.validate()?;
    let reps = config.replications;
    let total = config.n_grid.len() * reps;
    let results = exec.run(total, |k| {
        let (i, r) = (k / reps, k % reps);
        let mut rng = replication_rng(config.master_seed, i, r);
        job(config.n_grid[i], &mut rng).and_then(|v| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Numerical(alloc::format!("non-finite measure {v}")))
            }
        })
    });
    let mut rows = Vec::with_capacity(total);
    let mut points = Vec::with_capacity(config.n_grid.len());
    for (i, &n) in config.n_grid.iter().enumerate() {
        let mut ok = Vec::with_capacity(reps);
        let mut failures = 0;
        for (r, res) in results[i * reps..(i + 1) * reps].iter().enumerate() {
            match res {
                Ok(v) => {
                    ok.push(*v);
                    rows.push(CurveRow {
                        n,
                        replication: r,
                        value: Some(*v),
                        status: String::from("ok"),
                    });
                }
                Err(e) => {
                    failures += 1;
                    rows.push(CurveRow {
                        n,
                        replication: r,
                        value: None,
                        status: alloc::format!("{e}"),
                    });
                }
            }
        }
        if failures as f64 > MAX_FAILURE_SHARE * reps as f64 {
            let first = rows
                .iter()
                .rev()
                .find(|r| r.n == n && r.value.is_none())
                .map(|r| r.status.clone())
                .unwrap_or_default();
            bail!(
                Experiment,
                "{failures} of {reps} replications failed at n = {n}; last error: {first}"
            );
        }
        ok.sort_by(f64::total_cmp);
        points.push(CurvePoint {
            n,
            median: quantile_sorted(&ok, 0.5),
            q1: quantile_sorted(&ok, 0.25),
            q3: quantile_sorted(&ok, 0.75),
            failures,
        });
    }
    Ok(MeasureCurve {
        label: String::from(label),
        rows,
        points,
    })
}

/// Evaluates the configured measure on one posterior.
pub fn measure_value(
    measure: Measure,
    class: &LossClass,
    reference: Option<&Loss>,
    post: &crate::posteriors::Posterior,
    bracket: Option<Interval>,
) -> Result<f64> {
    let reference_decision = |l0: Option<&Loss>| -> Result<f64> {
        match l0 {
            Some(l) => bayes_action(l, post, bracket),
            None => bail!(Precondition, "{} needs a reference loss", measure.name()),
        }
    };
    match measure {
        Measure::Diameter => Ok(action_set(class, post, bracket)?.diameter()),
        Measure::SupRegret => sup_regret(class, post, reference_decision(reference)?, bracket),
        Measure::Range => range(class, post, reference_decision(reference)?),
    }
}

/// Traces `config.measure` across the sample-size grid: for each replication
/// draws `n` observations from the model's sampler, forms the posterior and
/// evaluates the measure. `reference` defaults to the class's own reference
/// loss.
pub fn simulate_measure_curve<E: Executor>(
    model: &SamplingModel,
    class: &LossClass,
    reference: Option<&Loss>,
    config: &ExperimentConfig,
    exec: &E,
) -> Result<MeasureCurve> {
    let own = reference_loss(class);
    let l0 = reference.or(own.as_ref());
    simulate_with(config.measure.name(), config, exec, |n, rng| {
        let data = model.sampler.sample(rng, n);
        let post = model.posterior(&data)?;
        measure_value(config.measure, class, l0, &post, config.bracket)
    })
}
