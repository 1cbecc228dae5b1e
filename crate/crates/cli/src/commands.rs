use std::path::PathBuf;

use robust_bayes_core::decision::{bayes_action, Interval};
use robust_bayes_core::losses::{
    class_diagnostics, make_asymmetric_quadratic, make_dam_losses, Verdict,
};
use robust_bayes_core::posteriors::{normal_update, GammaPosterior, Posterior};
use robust_bayes_core::ratelab::experiment::replication_rng;
use robust_bayes_core::ratelab::theorems::TestFn;
use robust_bayes_core::ratelab::{
    fit_curve, simulate_measure_curve, verify_thm81, verify_thm82, ExperimentConfig, Measure,
    MeasureCurve, SamplingModel, TrueSampler,
};
use robust_bayes_core::robustness::closed_form::AsymmetricQuadraticConstants;
use robust_bayes_core::robustness::{
    limit_diameter, limit_range_coeffs, limit_sup_regret, minimizer_at, phi, sup_regret,
    RobustnessReport,
};
use robust_bayes_core::{Loss, LossClass};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::exec::RayonExecutor;
use crate::output::{fmt_f64, write_curve, write_fit, write_summary, write_table, OutputSpec};
use crate::setup::{
    class_from, measure_from, model_from, n_grid_from, replications_from, ClassSpec, DEFAULT_ETA,
    DEFAULT_SLOPE_BAND,
};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUT_DIR: &str = "results";

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct GlobalOptions {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl GlobalOptions {
    /// `--seed` wins over `experiment.seed`, which wins over the default.
    fn seed(&self, cfg: Option<&RunConfig>) -> CliResult<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        Ok(match cfg {
            Some(c) => c.u64("experiment.seed")?.unwrap_or(DEFAULT_SEED),
            None => DEFAULT_SEED,
        })
    }

    fn output(&self, cfg: Option<&RunConfig>) -> OutputSpec {
        let dir = self
            .out
            .clone()
            .or_else(|| cfg.and_then(|c| c.str("output.dir")).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let prefix = cfg
            .and_then(|c| c.str("output.prefix"))
            .unwrap_or("")
            .to_string();
        OutputSpec { dir, prefix }
    }

    fn executor(&self) -> CliResult<RayonExecutor> {
        RayonExecutor::new(self.workers).map_err(|e| CliError::runtime(format!("thread pool: {e}")))
    }
}

/// Dam example: Gamma(100, 193.6) posterior, flood-cost losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DamSummary {
    pub d_upper: f64,
    pub d_lower: f64,
    pub d_reference: f64,
    pub sup_regret: f64,
    pub limit_diameter: f64,
    pub limit_sup_regret: f64,
}

pub const DAM_THETA: f64 = 0.5;
pub const DAM_BRACKET: Interval = (0.0, 30.0);

pub fn dam_summary() -> CliResult<DamSummary> {
    let dam = make_dam_losses()?;
    let post: Posterior = GammaPosterior::new(100.0, 193.6)?.into();
    let bracket = Some(DAM_BRACKET);
    let d_reference = bayes_action(&dam.reference, &post, bracket)?;
    let class: LossClass = dam.finite.clone().into();
    Ok(DamSummary {
        d_upper: bayes_action(dam.envelope.upper(), &post, bracket)?,
        d_lower: bayes_action(dam.envelope.lower(), &post, bracket)?,
        d_reference,
        sup_regret: sup_regret(&class, &post, d_reference, bracket)?,
        limit_diameter: limit_diameter(&class, DAM_THETA, bracket)?,
        limit_sup_regret: limit_sup_regret(&class, &dam.reference, DAM_THETA, bracket)?,
    })
}

pub fn cmd_dam_demo(opts: &GlobalOptions) -> CliResult<DamSummary> {
    let s = dam_summary()?;
    println!("dam example, posterior Gamma(100, 193.6)");
    println!("  d_U^n            {:.4}", s.d_upper);
    println!("  d_L^n            {:.4}", s.d_lower);
    println!("  d_0^n            {:.4}", s.d_reference);
    println!("  sup regret       {:.4}", s.sup_regret);
    println!(
        "  limit diameter   {:.4}  (theta = {DAM_THETA})",
        s.limit_diameter
    );
    println!("  limit sup regret {:.4}", s.limit_sup_regret);
    let out = opts.output(None);
    let path = out.path("dam_demo.csv");
    let header = [
        "d_upper",
        "d_lower",
        "d_reference",
        "sup_regret",
        "limit_diameter",
        "limit_sup_regret",
    ];
    let row = [
        s.d_upper,
        s.d_lower,
        s.d_reference,
        s.sup_regret,
        s.limit_diameter,
        s.limit_sup_regret,
    ]
    .map(fmt_f64)
    .to_vec();
    write_table(&path, &header, &[row])?;
    println!("wrote {}", path.display());
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct NormalDemoArgs {
    pub k1: f64,
    pub k2: f64,
    pub mu0: f64,
    pub lambda0: f64,
    pub lambda: f64,
    pub theta: f64,
    pub n_list: Vec<usize>,
}

impl Default for NormalDemoArgs {
    fn default() -> Self {
        Self {
            k1: 1.0,
            k2: 2.0,
            mu0: 0.0,
            lambda0: 1.0,
            lambda: 1.0,
            theta: 0.0,
            n_list: vec![10, 100, 1000, 10_000],
        }
    }
}

/// Largest relative disagreement tolerated between closed forms and the
/// generic pipeline.
pub const AGREEMENT_TOL: f64 = 1e-6;

pub fn cmd_normal_demo(args: &NormalDemoArgs, opts: &GlobalOptions) -> CliResult<f64> {
    if !(args.k1 > 0.0 && args.k1 < args.k2) {
        return Err(CliError::config(format!(
            "normal-demo needs 0 < k1 < k2, got k1 = {}, k2 = {}",
            args.k1, args.k2
        )));
    }
    if !(args.lambda > 0.0 && args.lambda0 > 0.0) || args.n_list.is_empty() {
        return Err(CliError::config(
            "normal-demo needs positive precisions and a nonempty n list",
        ));
    }
    let c = AsymmetricQuadraticConstants::new(args.k1, args.k2)?;
    let class: LossClass = make_asymmetric_quadratic(args.k1, args.k2)?.into();
    let seed = opts.seed(None)?;
    let sampler = TrueSampler::Normal {
        mean: args.theta,
        sd: 1.0 / args.lambda.sqrt(),
    };
    println!(
        "r1 = {:.10}  r2 = {:.10}  c1 = {:.10}  c2 = {:.10}",
        c.r1, c.r2, c.c1, c.c2
    );
    println!(
        "{:>8} {:>14} {:>16} {:>14} {:>14} {:>10}",
        "n", "lambda_n", "diam*sqrt(l_n)", "regret*l_n", "range*l_n", "max rel"
    );
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for (i, &n) in args.n_list.iter().enumerate() {
        let data = sampler.sample(&mut replication_rng(seed, i, 0), n);
        let post: Posterior = normal_update(args.mu0, args.lambda0, args.lambda, &data)?.into();
        let lambda_n = args.lambda0 + n as f64 * args.lambda;
        let rep = RobustnessReport::compute(&class, &post, Some(post.mean()), None)?;
        let pairs = [
            (c.diameter(lambda_n), rep.diameter.unwrap_or(f64::NAN)),
            (c.sup_regret(lambda_n), rep.sup_regret.unwrap_or(f64::NAN)),
            (c.range(lambda_n), rep.range.unwrap_or(f64::NAN)),
        ];
        let rel = pairs
            .iter()
            .map(|(e, g)| (e - g).abs() / e.abs())
            .fold(0.0, f64::max);
        worst = worst.max(if rel.is_nan() { f64::INFINITY } else { rel });
        println!(
            "{n:>8} {lambda_n:>14.4} {:>16.10} {:>14.10} {:>14.10} {rel:>10.2e}{}",
            pairs[0].1 * lambda_n.sqrt(),
            pairs[1].1 * lambda_n,
            pairs[2].1 * lambda_n,
            if rel > AGREEMENT_TOL {
                "  DISAGREES"
            } else {
                ""
            }
        );
        let mut row = vec![n.to_string(), fmt_f64(lambda_n), fmt_f64(post.mean())];
        for (e, g) in pairs {
            row.push(fmt_f64(e));
            row.push(fmt_f64(g));
        }
        row.push(fmt_f64(rel));
        rows.push(row);
    }
    let out = opts.output(None);
    let path = out.path("normal_demo.csv");
    let header = [
        "n",
        "lambda_n",
        "mu_n",
        "diameter_exact",
        "diameter",
        "sup_regret_exact",
        "sup_regret",
        "range_exact",
        "range",
        "max_rel_diff",
    ];
    write_table(&path, &header, &rows)?;
    println!("wrote {}", path.display());
    if worst > AGREEMENT_TOL {
        return Err(CliError::runtime(format!(
            "closed forms and pipeline disagree by {worst:e}"
        )));
    }
    Ok(worst)
}

/// Limit the measure settles at, and the exponent at which it gets there.
pub fn measure_limit(
    measure: Measure,
    spec: &ClassSpec,
    model: &SamplingModel,
) -> CliResult<(f64, f64)> {
    let theta = model.theta;
    let snap = |v: f64| if v.abs() <= 1e-8 { 0.0 } else { v };
    let need_reference = || {
        spec.reference.clone().ok_or_else(|| {
            CliError::config(format!(
                "{} needs a class with a reference loss",
                measure.name()
            ))
        })
    };
    Ok(match measure {
        Measure::Diameter => {
            let limit = snap(limit_diameter(&spec.class, theta, spec.bracket)?);
            // Members with a common minimizer and a common phi at theta have
            // Bayes actions that merge at rate 1/n rather than 1/sqrt(n).
            let phis: Result<Vec<f64>, _> = spec
                .class
                .representatives()
                .iter()
                .map(|l| phi(l, theta, spec.bracket))
                .collect();
            let merged = match phis {
                Ok(p) => p
                    .iter()
                    .all(|v| (v - p[0]).abs() <= 1e-6 * (1.0 + p[0].abs())),
                Err(_) => false,
            };
            (limit, if limit == 0.0 && merged { -1.0 } else { -0.5 })
        }
        Measure::SupRegret => {
            let l0 = need_reference()?;
            let limit = snap(limit_sup_regret(&spec.class, &l0, theta, spec.bracket)?);
            (limit, if limit == 0.0 { -1.0 } else { -0.5 })
        }
        Measure::Range => {
            let l0 = need_reference()?;
            range_limit(&spec.class, &l0, model, spec.bracket)?
        }
    })
}

fn range_limit(
    class: &LossClass,
    l0: &Loss,
    model: &SamplingModel,
    bracket: Option<Interval>,
) -> CliResult<(f64, f64)> {
    let theta = model.theta;
    let band = match class {
        LossClass::Band(b) => Some(b.clone()),
        LossClass::Envelope(e) => e.band().cloned(),
        LossClass::PriorRatio(p) => p.to_band().ok(),
        LossClass::Finite(_) => None,
    };
    if let Some(b) = band {
        let lim = limit_range_coeffs(&b, theta, model.i_theta, model.second_moment, bracket)?;
        let at = if lim.at_theta.abs() <= 1e-8 {
            0.0
        } else {
            lim.at_theta
        };
        return Ok((
            at,
            if lim.first_order.abs() > 1e-8 {
                -0.5
            } else {
                -1.0
            },
        ));
    }
    let d0 = minimizer_at(l0, theta, bracket)?;
    let values: Vec<f64> = class
        .representatives()
        .iter()
        .map(|l| l.value(theta, d0))
        .collect();
    let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((if spread.abs() <= 1e-8 { 0.0 } else { spread }, -0.5))
}

#[derive(Debug, Clone)]
pub struct RatesOutcome {
    pub curve: MeasureCurve,
    pub fit: robust_bayes_core::ratelab::RateFit,
    pub limit: f64,
    pub pass: bool,
}

pub fn cmd_rates(cfg: &RunConfig, opts: &GlobalOptions) -> CliResult<RatesOutcome> {
    let mut required = vec!["class.kind", "experiment.measure", "model.family"];
    if !cfg.contains("model.sampler") {
        required.push("model.theta");
    }
    cfg.require(&required)?;
    let model = model_from(cfg)?;
    let spec = class_from(cfg)?;
    let measure = measure_from(cfg)?;
    let config = ExperimentConfig {
        n_grid: n_grid_from(cfg)?,
        replications: replications_from(cfg)?,
        master_seed: opts.seed(Some(cfg))?,
        measure,
        bracket: spec.bracket,
    };
    let band = cfg.f64_or("experiment.band", DEFAULT_SLOPE_BAND)?;
    let override_limit = cfg.f64("experiment.limit")?;
    let override_exponent = cfg.f64("experiment.predicted")?;
    if config.n_grid.len() < robust_bayes_core::ratelab::fit::MIN_FIT_POINTS {
        return Err(CliError::config(
            "experiment.n_grid needs at least 4 sample sizes for a rate fit",
        ));
    }
    let out = opts.output(Some(cfg));
    let exec = opts.executor()?;

    let (auto_limit, auto_exponent) = measure_limit(measure, &spec, &model)?;
    let limit = override_limit.unwrap_or(auto_limit);
    let predicted = override_exponent.unwrap_or(auto_exponent);
    let curve =
        simulate_measure_curve(&model, &spec.class, spec.reference.as_ref(), &config, &exec)?;
    write_curve(&out.path("curve.csv"), &curve)?;
    write_summary(&out.path("summary.csv"), &curve.points)?;
    let fit = fit_curve(&curve, limit, predicted)?;
    let pass = fit.within(band);
    write_fit(&out.path("fit.csv"), &fit, pass)?;

    println!(
        "{} of class `{}`, {} replications per n, seed {}",
        measure.name(),
        spec.kind,
        config.replications,
        config.master_seed
    );
    println!(
        "{:>8} {:>16} {:>16} {:>16} {:>16} {:>8}",
        "n", "median", "q1", "q3", "med |m - lim|", "failed"
    );
    for (p, dev) in curve.points.iter().zip(curve.deviation_medians(limit)) {
        println!(
            "{:>8} {:>16.8e} {:>16.8e} {:>16.8e} {:>16.8e} {:>8}",
            p.n, p.median, p.q1, p.q3, dev, p.failures
        );
    }
    println!(
        "limit {limit:.6e}; slope {:.4} +- {:.4} (predicted {predicted}, band {band}), r^2 {:.4}: {}",
        fit.slope,
        fit.slope_stderr,
        fit.r_squared,
        if pass { "pass" } else { "FAIL" }
    );
    println!("wrote {}", out.dir.display());
    if !pass {
        return Err(CliError::runtime(format!(
            "fitted slope {:.4} is outside {predicted} +- {band}",
            fit.slope
        )));
    }
    Ok(RatesOutcome {
        curve,
        fit,
        limit,
        pass,
    })
}

pub fn cmd_diagnostics(cfg: &RunConfig) -> CliResult<Vec<(String, Verdict)>> {
    cfg.require(&["class.kind", "model.theta"])?;
    let spec = class_from(cfg)?;
    let theta = cfg.f64("model.theta")?.unwrap_or_default();
    let eta = cfg
        .f64_list("class.eta")?
        .unwrap_or_else(|| DEFAULT_ETA.to_vec());
    if eta.is_empty() || eta.iter().any(|e| e.is_nan() || *e <= 0.0) {
        return Err(CliError::config("class.eta must list positive radii"));
    }
    let diag = class_diagnostics(&spec.class, theta, &eta);
    println!(
        "class `{}` at theta = {theta}, decision set [{}, {}]",
        spec.kind, diag.decision_set.0, diag.decision_set.1
    );
    let show = |v: Option<f64>| v.map_or_else(|| String::from("n/a"), |x| format!("{x:.6e}"));
    for l in &diag.losses {
        let kappa = l
            .kappa
            .first()
            .map_or_else(String::new, |(eta, k)| format!("  kappa({eta}) {k:.4e}"));
        println!(
            "  {:<12} minimizer {:>14}  D02 {:>14}  D11 {:>14}{kappa}{}",
            l.label,
            show(l.minimizer),
            show(l.d02),
            show(l.d11),
            if l.kink_at_minimizer {
                "  (kink at minimizer)"
            } else {
                ""
            }
        );
    }
    let mut verdicts = Vec::new();
    for c in &diag.checks {
        let v = match c.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Unchecked => "not checked",
        };
        println!("  {:<4} {:<12} {}", c.name, v, c.detail);
        verdicts.push((c.name.to_string(), c.verdict));
    }
    Ok(verdicts)
}

/// Which posterior-expansion check to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expansion {
    FirstOrder,
    SecondOrder,
}

type Boxed = Box<dyn Fn(f64) -> f64 + Sync + Send>;

fn test_function(name: &str, order: Expansion, theta: f64) -> CliResult<(Boxed, f64)> {
    Ok(match (order, name) {
        (_, "zero") => (Box::new(|_| 0.0), 0.0),
        (Expansion::FirstOrder, "linear") => (Box::new(move |s| s - theta), 1.0),
        (Expansion::FirstOrder, "log") if theta > 0.0 => (Box::new(move |s: f64| (s / theta).ln()), 1.0 / theta),
        (Expansion::FirstOrder, "square") => (Box::new(move |s| (s - theta) * (s - theta)), 0.0),
        (Expansion::SecondOrder, "square") => (Box::new(move |s| (s - theta) * (s - theta)), 2.0),
        (Expansion::SecondOrder, "cube") => (Box::new(move |s: f64| (s - theta).powi(3)), 0.0),
        _ => {
            return Err(CliError::config(format!(
                "experiment.test_function `{name}` is not available here (first order: zero, linear, log, square; second order: zero, square, cube)"
            )))
        }
    })
}

pub fn cmd_expansion(
    order: Expansion,
    cfg: &RunConfig,
    opts: &GlobalOptions,
) -> CliResult<robust_bayes_core::ratelab::TrendReport> {
    let mut required = vec!["model.family"];
    if !cfg.contains("model.sampler") {
        required.push("model.theta");
    }
    cfg.require(&required)?;
    let model = model_from(cfg)?;
    let default_fn = if order == Expansion::FirstOrder {
        "linear"
    } else {
        "square"
    };
    let name = cfg.str("experiment.test_function").unwrap_or(default_fn);
    let (f, coeff) = test_function(name, order, model.theta)?;
    let config = ExperimentConfig::new(
        n_grid_from(cfg)?,
        replications_from(cfg)?,
        opts.seed(Some(cfg))?,
        Measure::Diameter,
    );
    let out = opts.output(Some(cfg));
    let exec = opts.executor()?;
    let f: TestFn<'_> = &*f;
    let (tag, report) = match order {
        Expansion::FirstOrder => ("thm81", verify_thm81(&model, f, coeff, &config, &exec)?),
        Expansion::SecondOrder => ("thm82", verify_thm82(&model, f, coeff, &config, &exec)?),
    };
    write_curve(&out.path(&format!("{tag}_curve.csv")), &report.curve)?;
    write_summary(&out.path(&format!("{tag}_summary.csv")), report.points())?;
    println!(
        "{} with f = {name}, {} model, theta = {}",
        report.label,
        model.family.label(),
        model.theta
    );
    println!("{:>8} {:>16} {:>16} {:>16}", "n", "median", "q1", "q3");
    for p in report.points() {
        println!(
            "{:>8} {:>16.8e} {:>16.8e} {:>16.8e}",
            p.n, p.median, p.q1, p.q3
        );
    }
    println!(
        "median at largest n / smallest n = {:.4}: {}",
        report.last_median / report.first_median,
        if report.pass { "pass" } else { "FAIL" }
    );
    if !report.pass {
        return Err(CliError::runtime(
            "scaled residual did not halve across the grid",
        ));
    }
    Ok(report)
}
