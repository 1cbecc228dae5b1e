//! Simulation harness for convergence rates: sampling models (possibly
//! misspecified), measure curves over a grid of sample sizes, log-log rate
//! fits and theorem checks.

pub mod experiment;
pub mod fit;
pub mod model;
pub mod theorems;

pub use experiment::{
    simulate_measure_curve, simulate_with, CurvePoint, CurveRow, Executor, ExperimentConfig,
    Measure, MeasureCurve, Sequential,
};
pub use fit::{fit_curve, fit_log_slope, RateFit};
pub use model::{ModelFamily, SamplingModel, TrueSampler};
pub use theorems::{
    smooth_vs_nonsmooth_demo, verify_thm81, verify_thm82, MomentCheck, SmoothContrast, TrendReport,
};
