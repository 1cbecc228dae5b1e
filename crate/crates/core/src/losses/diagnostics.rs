use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Loss, LossClass, Partial};
use crate::minimize::brent;

/// Minimum admissible `|D02 l(theta, d_l)|`.
pub const D02_FLOOR: f64 = 1e-10;
const SCAN_POINTS: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Unchecked,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Unchecked => "unchecked",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub verdict: Verdict,
    pub detail: String,
}

impl AssumptionCheck {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Self {
            name,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            detail,
        }
    }

    fn unchecked(name: &'static str, why: &str) -> Self {
        Self {
            name,
            verdict: Verdict::Unchecked,
            detail: String::from(why),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossDiagnostics {
    pub label: String,
    /// `argmin l(theta, .)` over the decision set, if one was located.
    pub minimizer: Option<f64>,
    pub min_value: f64,
    /// `D02 l(theta, d_l)`; `None` when the minimizer sits on a kink.
    pub d02: Option<f64>,
    pub d11: Option<f64>,
    pub kink_at_minimizer: bool,
    /// `(eta, kappa(eta))`.
    pub kappa: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDiagnostics {
    pub theta: f64,
    pub decision_set: (f64, f64),
    pub losses: Vec<LossDiagnostics>,
    pub checks: Vec<AssumptionCheck>,
}

impl ClassDiagnostics {
    pub fn verdict(&self, name: &str) -> Option<Verdict> {
        self.checks
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.verdict)
    }
}

fn diagnose_loss(loss: &Loss, theta: f64, k: (f64, f64), eta_grid: &[f64]) -> LossDiagnostics {
    let value = |d: f64| match loss.try_value(theta, d) {
        Ok(v) if v.is_finite() => v,
        _ => f64::INFINITY,
    };
    let scan: Vec<(f64, f64)> = (0..SCAN_POINTS)
        .map(|i| {
            let d = k.0 + (k.1 - k.0) * i as f64 / (SCAN_POINTS - 1) as f64;
            (d, value(d))
        })
        .collect();
    // Start from the best scan cell so that Brent sees a local bracket.
    let best = scan
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lo = scan[best.saturating_sub(1)].0;
    let hi = scan[(best + 1).min(SCAN_POINTS - 1)].0;
    let m = brent(value, lo, hi, 1e-10, 500);
    let minimizer = m.fx.is_finite().then_some(m.x);

    let mut out = LossDiagnostics {
        label: String::from(loss.label()),
        minimizer,
        min_value: m.fx,
        d02: None,
        d11: None,
        kink_at_minimizer: false,
        kappa: Vec::new(),
    };
    let Some(dl) = minimizer else {
        return out;
    };
    out.kink_at_minimizer = loss.near_kink(theta, dl, 1e-6);
    if !out.kink_at_minimizer {
        out.d02 = Some(loss.partial(Partial::D02, theta, dl));
        out.d11 = Some(loss.partial(Partial::D11, theta, dl));
    }
    for &eta in eta_grid {
        let mut kappa = f64::INFINITY;
        let probes = scan
            .iter()
            .copied()
            .chain([dl - eta, dl + eta].into_iter().map(|d| (d, value(d))));
        for (d, v) in probes {
            if (d - dl).abs() >= eta * (1.0 - 1e-12) && d >= k.0 && d <= k.1 {
                kappa = kappa.min(v - m.fx);
            }
        }
        out.kappa.push((eta, kappa));
    }
    out
}

/// Pointwise checks of assumptions 1a, 1c, 1f and 1g at `theta` for the
/// representative losses of `class`, with the decision set taken from the
/// class's audit box (or `[theta - 10, theta + 10]` without one).
pub fn class_diagnostics(class: &LossClass, theta: f64, eta_grid: &[f64]) -> ClassDiagnostics {
    let k = class
        .audit()
        .map(|a| a.d)
        .unwrap_or((theta - 10.0, theta + 10.0));
    class_diagnostics_on(class, theta, eta_grid, k)
}

/// [`class_diagnostics`] on an explicit compact decision set `k`.
pub fn class_diagnostics_on(
    class: &LossClass,
    theta: f64,
    eta_grid: &[f64],
    k: (f64, f64),
) -> ClassDiagnostics {
    let reps = class.representatives();
    let losses: Vec<LossDiagnostics> = reps
        .iter()
        .map(|l| diagnose_loss(l, theta, k, eta_grid))
        .collect();
    let mut checks = Vec::new();

    // 1a: a unique minimizer, located away from the edge of K.
    let edge = 1e-6 * (1.0 + (k.1 - k.0).abs());
    let mut bad = Vec::new();
    for d in &losses {
        match d.minimizer {
            None => bad.push(format!("{}: no finite minimum", d.label)),
            Some(x) if x - k.0 < edge || k.1 - x < edge => {
                bad.push(format!("{}: minimizer {x} on the edge of K", d.label))
            }
            Some(_) => {}
        }
        if let Some(&(eta, kap)) = d.kappa.first() {
            if !(kap > 0.0) {
                bad.push(format!("{}: not unique (kappa({eta}) = {kap})", d.label));
            }
        }
    }
    let witness: Vec<String> = losses
        .iter()
        .map(|d| match d.minimizer {
            Some(x) => format!("d_{} = {x:.6}", d.label),
            None => format!("d_{} not located", d.label),
        })
        .collect();
    checks.push(AssumptionCheck::new(
        "1a",
        bad.is_empty(),
        if bad.is_empty() {
            witness.join(", ")
        } else {
            bad.join("; ")
        },
    ));
    checks.push(AssumptionCheck::unchecked(
        "1b",
        "needs a neighbourhood of theta; not checked pointwise",
    ));

    // 1c: finite D11, D02 and D02 bounded away from zero, none on a kink.
    let kinked: Vec<&str> = losses
        .iter()
        .filter(|d| d.kink_at_minimizer)
        .map(|d| d.label.as_str())
        .collect();
    let inf_d02 = losses
        .iter()
        .filter_map(|d| d.d02)
        .map(f64::abs)
        .fold(f64::INFINITY, f64::min);
    let finite = losses
        .iter()
        .all(|d| d.d02.is_none_or(f64::is_finite) && d.d11.is_none_or(f64::is_finite));
    let c_pass = kinked.is_empty()
        && finite
        && inf_d02 > D02_FLOOR
        && losses.iter().all(|d| d.minimizer.is_some());
    let c_detail = if !kinked.is_empty() {
        format!(
            "D02 does not exist at the minimizer of {} (registered kink)",
            kinked.join(", ")
        )
    } else {
        format!("inf |D02| = {inf_d02:e}")
    };
    checks.push(AssumptionCheck::new("1c", c_pass, c_detail));
    checks.push(AssumptionCheck::unchecked(
        "1d",
        "equicontinuity is not checked",
    ));
    checks.push(AssumptionCheck::unchecked(
        "1e",
        "needs a dominating function; not checked",
    ));

    // 1f, sampled: the best value inside K beats every value just outside K
    // for sigma near theta.
    let inside = losses
        .iter()
        .map(|d| d.min_value)
        .fold(f64::NEG_INFINITY, f64::max);
    let width = (k.1 - k.0).abs().max(1.0);
    let mut outside = f64::INFINITY;
    for l in &reps {
        for i in 0..=10 {
            let s = theta - 0.1 + 0.02 * i as f64;
            for j in 1..=50 {
                let off = width * j as f64 / 50.0;
                for d in [k.0 - off, k.1 + off] {
                    if let Ok(v) = l.try_value(s, d) {
                        if !v.is_nan() {
                            outside = outside.min(v);
                        }
                    }
                }
            }
        }
    }
    checks.push(AssumptionCheck::new(
        "1f",
        inside < outside,
        format!("sup inf_K l(theta, .) = {inside:e}, sampled inf outside K = {outside:e}"),
    ));

    // 1g: kappa(eta) > 0 for every eta.
    let kappas: Vec<(f64, f64)> = eta_grid
        .iter()
        .enumerate()
        .map(|(i, &eta)| {
            (
                eta,
                losses
                    .iter()
                    .filter_map(|d| d.kappa.get(i))
                    .map(|k| k.1)
                    .fold(f64::INFINITY, f64::min),
            )
        })
        .collect();
    let g_pass = !kappas.is_empty() && kappas.iter().all(|&(_, k)| k > 0.0 && k.is_finite());
    let g_detail = kappas
        .iter()
        .map(|(e, k)| format!("kappa({e}) = {k:e}"))
        .collect::<Vec<_>>()
        .join(", ");
    checks.push(AssumptionCheck::new("1g", g_pass, g_detail));

    ClassDiagnostics {
        theta,
        decision_set: k,
        losses,
        checks,
    }
}
