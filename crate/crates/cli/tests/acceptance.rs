//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

use std::time::{Duration, Instant};

use robust_bayes::commands::dam_summary;
use robust_bayes::RayonExecutor;
use robust_bayes_core::decision::{action_set, bayes_action, expected_loss};
use robust_bayes_core::losses::{
    asymmetric_quadratic, audit_partials, half_squared_error, make_asymmetric_quadratic,
    make_dam_losses, make_translation_loss, smooth_translation_class, TranslationProfile,
};
use robust_bayes_core::posteriors::{NormalPosterior, Posterior};
use robust_bayes_core::ratelab::experiment::DEFAULT_N_GRID;
use robust_bayes_core::ratelab::theorems::TestFn;
use robust_bayes_core::ratelab::{
    fit_curve, simulate_measure_curve, smooth_vs_nonsmooth_demo, verify_thm81, verify_thm82,
    ExperimentConfig, Measure, SamplingModel, Sequential,
};
use robust_bayes_core::robustness::{range, sup_regret, RobustnessReport};
use robust_bayes_core::LossClass;

// Standardized Bayes actions and regrets of the (1, 2) class, computed
// independently at 30 digits from the normal distribution function.
const R1: f64 = -0.276_029_804_798_143_3;
const R2: f64 = 0.276_029_804_798_143_3;
const C1: f64 = 0.054_368_706_432_682_81;
const C2: f64 = 0.054_368_706_432_682_81;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(
    id: usize,
    name: &str,
    budget: Option<Duration>,
    body: impl FnOnce() -> Result<Outcome, String>,
) -> bool {
    let start = Instant::now();
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(body));
    let elapsed = start.elapsed();
    let (mut pass, mut detail) = match result {
        Ok(Ok(o)) => (o.pass, o.detail),
        Ok(Err(e)) => (false, format!("error: {e}")),
        Err(_) => (false, String::from("panicked")),
    };
    if let Some(b) = budget {
        if elapsed > b {
            pass = false;
            detail.push_str(&format!("; over the {:.0} s budget", b.as_secs_f64()));
        }
    }
    println!(
        "criterion {id} [{}] {name} ({:.2} s): {detail}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    pass
}

fn within(v: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&v)
}

fn dam_reproduction() -> Result<Outcome, String> {
    let s = dam_summary().map_err(|e| e.to_string())?;
    let pass = within(s.d_upper, 2.65, 2.75)
        && within(s.d_lower, 7.65, 7.75)
        && within(s.d_reference, 4.45, 4.55)
        && within(s.sup_regret, 19.2, 19.8);
    Ok(Outcome {
        pass,
        detail: format!(
            "d_U = {:.4}, d_L = {:.4}, d_0 = {:.4}, sup regret = {:.4}",
            s.d_upper, s.d_lower, s.d_reference, s.sup_regret
        ),
    })
}

fn dam_asymptotics() -> Result<Outcome, String> {
    let s = dam_summary().map_err(|e| e.to_string())?;
    Ok(Outcome {
        pass: within(s.limit_diameter, 4.7, 5.3) && within(s.limit_sup_regret, 19.0, 21.0),
        detail: format!(
            "limit diameter = {:.4}, limit sup regret = {:.4}",
            s.limit_diameter, s.limit_sup_regret
        ),
    })
}

fn closed_forms() -> Result<Outcome, String> {
    let class: LossClass = make_asymmetric_quadratic(1.0, 2.0)
        .map_err(|e| e.to_string())?
        .into();
    let mut worst = 0.0f64;
    for lambda in [10.0, 1e2, 1e3, 1e4] {
        let mu = 0.37;
        let post: Posterior = NormalPosterior::new(mu, lambda)
            .map_err(|e| e.to_string())?
            .into();
        let rep =
            RobustnessReport::compute(&class, &post, Some(mu), None).map_err(|e| e.to_string())?;
        let pairs = [
            (rep.diameter.unwrap_or(f64::NAN), (R2 - R1) / lambda.sqrt()),
            (rep.sup_regret.unwrap_or(f64::NAN), C1.max(C2) / lambda),
            (rep.range.unwrap_or(f64::NAN), 0.5 * (2.0 - 1.0) / lambda),
        ];
        for (got, exact) in pairs {
            let rel = (got - exact).abs() / exact;
            worst = worst.max(if rel.is_nan() { f64::INFINITY } else { rel });
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-6,
        detail: format!("largest relative error {worst:.2e} (tolerance 1e-6)"),
    })
}

fn rate_verification(exec: &RayonExecutor) -> Result<Outcome, String> {
    let model = SamplingModel::normal(0.0, 1.0, 0.0, 0.01).map_err(|e| e.to_string())?;
    let class: LossClass = make_asymmetric_quadratic(1.0, 2.0)
        .map_err(|e| e.to_string())?
        .into();
    let bands = [
        (Measure::Diameter, -0.55, -0.45),
        (Measure::SupRegret, -1.1, -0.9),
        (Measure::Range, -1.05, -0.95),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (measure, lo, hi) in bands {
        let cfg = ExperimentConfig::new(DEFAULT_N_GRID.to_vec(), 200, 42, measure);
        let curve =
            simulate_measure_curve(&model, &class, None, &cfg, exec).map_err(|e| e.to_string())?;
        let fit =
            fit_curve(&curve, 0.0, measure.predicted_exponent()).map_err(|e| e.to_string())?;
        pass &= within(fit.slope, lo, hi);
        parts.push(format!(
            "{} slope {:.4} in [{lo}, {hi}]",
            measure.name(),
            fit.slope
        ));
    }
    Ok(Outcome {
        pass,
        detail: parts.join(", "),
    })
}

fn expansion_trends(exec: &RayonExecutor) -> Result<Outcome, String> {
    let cfg = ExperimentConfig::new(
        vec![50, 100, 200, 400, 800, 1600],
        200,
        42,
        Measure::Diameter,
    );
    let normal = SamplingModel::normal(0.7, 1.0, 0.0, 1.0).map_err(|e| e.to_string())?;
    let expo = SamplingModel::exponential(0.5).map_err(|e| e.to_string())?;
    let mut pass = true;
    let mut parts = Vec::new();
    for model in [&normal, &expo] {
        let t = model.theta;
        let linear = move |s: f64| s - t;
        let log = move |s: f64| (s / t).ln();
        let square = move |s: f64| (s - t) * (s - t);
        let cube = move |s: f64| (s - t).powi(3);
        let mut first: Vec<(&str, TestFn<'_>, f64)> = vec![
            ("sigma-theta", &linear, 1.0),
            ("(sigma-theta)^2", &square, 0.0),
        ];
        if model.family.label() == "exponential" {
            first.push(("log(sigma/theta)", &log, 1.0 / t));
        }
        for (name, f, g) in first {
            let r = verify_thm81(model, f, g, &cfg, exec).map_err(|e| e.to_string())?;
            pass &= r.pass;
            parts.push(format!(
                "{} first-order {name} {:.3}",
                model.family.label(),
                r.last_median / r.first_median
            ));
        }
        let second: [(&str, TestFn<'_>, f64); 2] = [
            ("(sigma-theta)^2", &square, 2.0),
            ("(sigma-theta)^3", &cube, 0.0),
        ];
        for (name, f, h) in second {
            let r = verify_thm82(model, f, h, &cfg, exec).map_err(|e| e.to_string())?;
            pass &= r.pass;
            parts.push(format!(
                "{} second-order {name} {:.3}",
                model.family.label(),
                r.last_median / r.first_median
            ));
        }
    }
    Ok(Outcome {
        pass,
        detail: format!(
            "ratio of medians n = 1600 / n = 50 (need <= 0.5): {}",
            parts.join(", ")
        ),
    })
}

fn smooth_contrast(exec: &RayonExecutor) -> Result<Outcome, String> {
    let model = SamplingModel::normal(0.0, 1.0, 0.0, 0.01).map_err(|e| e.to_string())?;
    let cfg = ExperimentConfig::new(
        vec![100, 300, 1000, 3000, 10_000],
        20,
        42,
        Measure::Diameter,
    );
    let c = smooth_vs_nonsmooth_demo(&model, 1.0, 2.0, &cfg, exec).map_err(|e| e.to_string())?;
    let spread = c.kinked_spread();
    let ratio = c.smooth_ratio();
    let constant_ok = (c.kinked_scaled[0] - (R2 - R1)).abs() < 1e-6;
    Ok(Outcome {
        pass: spread < 1e-6 && constant_ok && ratio < 0.25,
        detail: format!(
            "kinked scaled diameter {:.8} (r2 - r1 = {:.8}), relative spread {spread:.2e}; smooth ratio n = 1e4 / n = 1e2 = {ratio:.4}",
            c.kinked_scaled[0],
            R2 - R1
        ),
    })
}

fn property_suites() -> Result<Outcome, String> {
    let mut failures = Vec::new();
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut u = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };

    // Derivative audits at 100 random points.
    let dam = make_dam_losses().map_err(|e| e.to_string())?;
    let box_pts: Vec<(f64, f64)> = (0..100)
        .map(|_| (-3.0 + 6.0 * u(), -3.0 + 6.0 * u()))
        .collect();
    let dam_pts: Vec<(f64, f64)> = (0..100).map(|_| (0.1 + 1.9 * u(), 30.0 * u())).collect();
    let audited = [
        (asymmetric_quadratic("U", 2.0, 1.0), &box_pts),
        (asymmetric_quadratic("L", 1.0, 2.0), &box_pts),
        (half_squared_error(), &box_pts),
        (
            make_translation_loss(&TranslationProfile::exp_linear()).map_err(|e| e.to_string())?,
            &box_pts,
        ),
        (dam.reference.clone(), &dam_pts),
        (dam.envelope.upper().clone(), &dam_pts),
        (dam.envelope.lower().clone(), &dam_pts),
    ];
    for (loss, pts) in audited {
        if !audit_partials(&loss, pts, 1e-4).passed() {
            failures.push(format!("derivative audit of {}", loss.label()));
        }
    }

    // Orderings are verified on the full audit grid by the constructors.
    for (k1, k2) in [(0.5, 1.0), (1.0, 2.0), (0.25, 4.0)] {
        if make_asymmetric_quadratic(k1, k2).is_err() {
            failures.push(format!("envelope/band ordering for ({k1}, {k2})"));
        }
    }
    if smooth_translation_class().is_err() {
        failures.push(String::from("smooth envelope ordering"));
    }

    // Nonnegativity and scale equivariance on random configurations.
    let class: LossClass = make_asymmetric_quadratic(1.0, 2.0)
        .map_err(|e| e.to_string())?
        .into();
    for _ in 0..50 {
        let mu = -2.0 + 4.0 * u();
        let lambda = 1.0 + 500.0 * u();
        let d = mu + (-2.0 + 4.0 * u()) / lambda.sqrt();
        let post: Posterior = NormalPosterior::new(mu, lambda)
            .map_err(|e| e.to_string())?
            .into();
        for l in class.representatives() {
            let best = bayes_action(&l, &post, None).map_err(|e| e.to_string())?;
            let raw = expected_loss(&l, &post, d).map_err(|e| e.to_string())?
                - expected_loss(&l, &post, best).map_err(|e| e.to_string())?;
            if raw < -1e-10 {
                failures.push(format!("negative regret {raw:e}"));
            }
        }
        let c = 0.1 + 10.0 * u();
        let scaled = class.scaled(c);
        let (r, rs) = (
            sup_regret(&class, &post, d, None),
            sup_regret(&scaled, &post, d, None),
        );
        let (g, gs) = (range(&class, &post, d), range(&scaled, &post, d));
        let (a, b) = (
            action_set(&class, &post, None),
            action_set(&scaled, &post, None),
        );
        match (r, rs, g, gs, a, b) {
            (Ok(r), Ok(rs), Ok(g), Ok(gs), Ok(a), Ok(b)) => {
                if (rs - c * r).abs() > 1e-10 * (c * r).abs()
                    || (gs - c * g).abs() > 1e-10 * (c * g).abs()
                {
                    failures.push(format!("scale equivariance at c = {c}"));
                }
                if (a.lower - b.lower).abs() > 1e-8 || (a.upper - b.upper).abs() > 1e-8 {
                    failures.push(format!("action set moved under scaling by {c}"));
                }
            }
            _ => failures.push(String::from("measure evaluation failed")),
        }
    }

    // Seed determinism across worker counts.
    let model = SamplingModel::exponential(1.0).map_err(|e| e.to_string())?;
    let smooth: LossClass = smooth_translation_class()
        .map_err(|e| e.to_string())?
        .into();
    let cfg = ExperimentConfig::new(vec![10, 20, 40], 8, 17, Measure::Diameter);
    let bits = |c: robust_bayes_core::ratelab::MeasureCurve| {
        c.rows
            .iter()
            .map(|r| r.value.map(f64::to_bits))
            .collect::<Vec<_>>()
    };
    let base = bits(
        simulate_measure_curve(&model, &smooth, None, &cfg, &Sequential)
            .map_err(|e| e.to_string())?,
    );
    for w in [1, 3] {
        let exec = RayonExecutor::new(Some(w)).map_err(|e| e.to_string())?;
        if bits(
            simulate_measure_curve(&model, &smooth, None, &cfg, &exec)
                .map_err(|e| e.to_string())?,
        ) != base
        {
            failures.push(format!("output differs with {w} workers"));
        }
    }

    Ok(Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            String::from("derivative audits, orderings, nonnegativity, scale equivariance, seed determinism all hold")
        } else {
            failures.join("; ")
        },
    })
}

fn main() {
    let exec = RayonExecutor::new(None).expect("thread pool");
    let results = [
        check(
            1,
            "dam reproduction",
            Some(Duration::from_secs(5)),
            dam_reproduction,
        ),
        check(2, "dam asymptotics", None, dam_asymptotics),
        check(3, "closed-form identities", None, closed_forms),
        check(
            4,
            "rate verification",
            Some(Duration::from_secs(60)),
            || rate_verification(&exec),
        ),
        check(
            5,
            "posterior expansion trends",
            Some(Duration::from_secs(120)),
            || expansion_trends(&exec),
        ),
        check(6, "smooth versus kinked contrast", None, || {
            smooth_contrast(&exec)
        }),
        check(7, "property suites", None, property_suites),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
