//! Posterior expected losses, Bayes actions and Bayes-action sets.

use alloc::string::String;
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::error::{bail, Error, Result};
use crate::losses::{Loss, LossClass, Partial};
use crate::minimize::{brent, find_root};
use crate::posteriors::Posterior;

/// Closed decision interval searched for a Bayes action.
pub type Interval = (f64, f64);

/// Absolute argument tolerance of the minimizer.
pub const ARG_TOL: f64 = 1e-8;
/// Stationarity tolerance factor: `|D01 l^n| <= STATIONARITY_TOL (1 + |D02 l^n|)`.
pub const STATIONARITY_TOL: f64 = 1e-6;
/// Doublings allowed when the minimum sits on an end of the bracket.
pub const MAX_EXPANSIONS: usize = 8;
const BRACKET_SDS: f64 = 20.0;

/// `l^n(d) = E[l(sigma, d)]` under the posterior, with the quadrature split at
/// the loss's kinks. Fails with a domain error if the loss is evaluated
/// outside its domain.
pub fn expected_loss(loss: &Loss, post: &Posterior, d: f64) -> Result<f64> {
    let first_error: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |s: f64| match loss.try_value(s, d) {
        Ok(v) => v,
        Err(e) => {
            first_error.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let value = post.expectation_with_breaks(integrand, &loss.kinks_at(d));
    if let Some(e) = first_error.into_inner() {
        return Err(e);
    }
    value
}

/// `D01 l^n(d) = E[D01 l(sigma, d)]`.
pub fn expected_d01(loss: &Loss, post: &Posterior, d: f64) -> Result<f64> {
    post.expectation_with_breaks(|s| loss.partial(Partial::D01, s, d), &loss.kinks_at(d))
}

/// `[mean - 20 sd, mean + 20 sd]` of the posterior.
pub fn default_bracket(post: &Posterior) -> Interval {
    let (m, sd) = (post.mean(), post.sd().max(1e-8));
    (m - BRACKET_SDS * sd, m + BRACKET_SDS * sd)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesAction {
    pub d: f64,
    /// `l^n(d)`.
    pub expected_loss: f64,
    /// `l^n` was flat around the minimum; `d` is the midpoint of the flat part.
    pub non_unique: bool,
    /// `|D01 l^n(d)|`, when the minimum is interior to the loss's domain.
    pub stationarity: Option<f64>,
}

/// The Bayes action `argmin_d l^n(d)`, searched in `bracket` (or the default
/// bracket).
pub fn bayes_action(loss: &Loss, post: &Posterior, bracket: Option<Interval>) -> Result<f64> {
    bayes_action_detailed(loss, post, bracket).map(|a| a.d)
}

/// [`bayes_action`] with the tie and stationarity diagnostics.
///
/// Brent's method on `l^n` locates the minimum to within the square root of
/// the quadrature noise; the estimate is then polished by a root search on
/// `D01 l^n`, which is accurate to the quadrature noise itself.
pub fn bayes_action_detailed(
    loss: &Loss,
    post: &Posterior,
    bracket: Option<Interval>,
) -> Result<BayesAction> {
    let (mut a, mut b) = bracket.unwrap_or_else(|| default_bracket(post));
    if !(a.is_finite() && b.is_finite() && a < b) {
        bail!(Bracketing, "invalid bracket [{a}, {b}]");
    }
    let last_error: RefCell<Option<Error>> = RefCell::new(None);
    let objective = |d: f64| match expected_loss(loss, post, d) {
        Ok(v) if v.is_finite() => v,
        Ok(_) => f64::INFINITY,
        Err(e) => {
            *last_error.borrow_mut() = Some(e);
            f64::INFINITY
        }
    };

    let mut found = None;
    for _ in 0..=MAX_EXPANSIONS {
        let m = brent(&objective, a, b, ARG_TOL, 500);
        let width = b - a;
        let edge = 1e-6 * width;
        let at_left = m.x - a < edge && objective(a) <= m.fx;
        let at_right = b - m.x < edge && objective(b) <= m.fx;
        let flat = {
            let tol = 1e-12 * (1.0 + m.fx.abs());
            objective(a + 0.25 * width) - m.fx <= tol && objective(b - 0.25 * width) - m.fx <= tol
        };
        if !(at_left || at_right) || flat {
            found = Some(m);
            break;
        }
        if at_left {
            a -= width;
        }
        if at_right {
            b += width;
        }
    }
    let Some(m) = found else {
        bail!(Bracketing, "no interior minimum of the expected {} loss after {MAX_EXPANSIONS} expansions (last bracket [{a}, {b}])", loss.label());
    };
    if !m.fx.is_finite() {
        if let Some(e) = last_error.into_inner() {
            return Err(Error::Numerical(alloc::format!(
                "expected {} loss is not finite: {e}",
                loss.label()
            )));
        }
        bail!(
            Numerical,
            "expected {} loss is not finite near {}",
            loss.label(),
            m.x
        );
    }

    // Flat objective: report the middle of the flat stretch.
    let flat_tol = 1e-12 * (1.0 + m.fx.abs());
    let probe = 1e-4 * (b - a);
    if objective(m.x - probe) - m.fx <= flat_tol && objective(m.x + probe) - m.fx <= flat_tol {
        let edge_of_flat = |towards: f64| {
            let (mut inside, mut outside) = (m.x, towards);
            if objective(outside) - m.fx <= flat_tol {
                return outside;
            }
            for _ in 0..100 {
                let mid = 0.5 * (inside + outside);
                if objective(mid) - m.fx <= flat_tol {
                    inside = mid;
                } else {
                    outside = mid;
                }
                if (outside - inside).abs() <= ARG_TOL {
                    break;
                }
            }
            inside
        };
        let d = 0.5 * (edge_of_flat(a) + edge_of_flat(b));
        return Ok(BayesAction {
            d,
            expected_loss: objective(d),
            non_unique: true,
            stationarity: None,
        });
    }

    let d01 = |d: f64| expected_d01(loss, post, d).unwrap_or(f64::NAN);
    let mut d = m.x;
    let mut delta = 1e-6 * (1.0 + m.x.abs());
    for _ in 0..30 {
        let (lo, hi) = ((m.x - delta).max(a), (m.x + delta).min(b));
        let (flo, fhi) = (d01(lo), d01(hi));
        if !(flo.is_finite() && fhi.is_finite()) {
            break;
        }
        if flo <= 0.0 && fhi >= 0.0 {
            if let Some(r) = find_root(d01, lo, hi, 1e-14 * (1.0 + m.x.abs()), 200) {
                let fr = objective(r);
                if fr <= m.fx + 1e-9 * (1.0 + m.fx.abs()) {
                    d = r;
                }
            }
            break;
        }
        if lo <= a && hi >= b {
            break;
        }
        delta *= 2.0;
    }
    let value = objective(d);
    let g = d01(d);
    let stationarity = if loss.check(post.mean(), d).is_ok() && g.is_finite() {
        Some(g.abs())
    } else {
        None
    };
    if let Some(s) = stationarity {
        let h = 1e-4 * (1.0 + d.abs());
        let curvature = (d01(d + h) - d01(d - h)) / (2.0 * h);
        if curvature.is_finite() && s > STATIONARITY_TOL * (1.0 + curvature.abs()) {
            bail!(
                Numerical,
                "Bayes action for {} is not stationary: |D01 l^n({d})| = {s:e}, D02 l^n = {curvature:e}",
                loss.label()
            );
        }
    }
    Ok(BayesAction {
        d,
        expected_loss: value,
        non_unique: false,
        stationarity,
    })
}

/// Endpoints of the Bayes-action set of a class and the losses attaining them.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    pub lower: f64,
    pub upper: f64,
    pub lower_loss: String,
    pub upper_loss: String,
}

impl ActionSet {
    pub fn point(d: f64, label: &str) -> Self {
        Self {
            lower: d,
            upper: d,
            lower_loss: label.into(),
            upper_loss: label.into(),
        }
    }

    pub fn diameter(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, d: f64, tol: f64) -> bool {
        d >= self.lower - tol && d <= self.upper + tol
    }
}

fn hull(actions: Vec<(f64, String)>) -> ActionSet {
    let mut lo = &actions[0];
    let mut hi = &actions[0];
    for a in &actions {
        if a.0 < lo.0 {
            lo = a;
        }
        if a.0 > hi.0 {
            hi = a;
        }
    }
    ActionSet {
        lower: lo.0,
        upper: hi.0,
        lower_loss: lo.1.clone(),
        upper_loss: hi.1.clone(),
    }
}

/// The Bayes-action set of a class: the interval between the actions of the
/// two envelopes for an envelope class, the hull of the members' actions for
/// finite and prior-ratio classes.
pub fn action_set(
    class: &LossClass,
    post: &Posterior,
    bracket: Option<Interval>,
) -> Result<ActionSet> {
    let members: Vec<Loss> = match class {
        LossClass::Envelope(e) => alloc::vec![e.upper().clone(), e.lower().clone()],
        LossClass::Finite(f) => f.losses().to_vec(),
        LossClass::PriorRatio(p) => p.losses(),
        LossClass::Band(_) => bail!(
            Unsupported,
            "Bayes-action sets are only available for envelope, finite and prior-ratio classes"
        ),
    };
    let mut actions = Vec::with_capacity(members.len());
    for l in &members {
        actions.push((bayes_action(l, post, bracket)?, String::from(l.label())));
    }
    Ok(hull(actions))
}

pub fn diameter(set: &ActionSet) -> f64 {
    set.diameter()
}
