//! The three robustness measures and their large-sample limits.
//!
//! For a posterior, a loss class and a reference decision `d`:
//!
//! * the Bayes-action set (see [`crate::decision::action_set`]) and its diameter,
//! * the supremum posterior regret `sup_l l^n(d) - inf_d' l^n(d')`,
//! * the range of the posterior expected loss `sup_l l^n(d) - inf_l l^n(d)`.
//!
//! The limit quantities evaluate the loss derivatives at the true parameter
//! `theta` and its minimizers `d_l = argmin l(theta, .)`.

pub mod closed_form;

use alloc::string::String;
use alloc::vec::Vec;

use crate::decision::{action_set, bayes_action_detailed, expected_loss, ActionSet, Interval};
use crate::error::{bail, Error, Result};
use crate::losses::{BandClass, Loss, LossClass, Partial};
use crate::minimize::{brent, find_root};
use crate::posteriors::Posterior;

/// Negative measures above `-NEGATIVE_TOL * max(1, scale)` are quadrature
/// noise and are reported as zero.
pub const NEGATIVE_TOL: f64 = 1e-10;
/// Smallest `|D02 l(theta, d_l)|` accepted by [`phi`].
pub const D02_FLOOR: f64 = 1e-10;
/// Minimizers closer than this count as shared.
pub const SHARED_MINIMIZER_TOL: f64 = 1e-6;

fn clamp(value: f64, scale: f64, what: &str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -NEGATIVE_TOL * scale.abs().max(1.0) {
        Ok(0.0)
    } else {
        bail!(Numerical, "{what} is negative ({value:e})")
    }
}

/// `reg_l^n(d) = l^n(d) - min l^n`.
pub fn regret(loss: &Loss, post: &Posterior, d: f64, bracket: Option<Interval>) -> Result<f64> {
    let best = bayes_action_detailed(loss, post, bracket)?;
    let at_d = expected_loss(loss, post, d)?;
    clamp(at_d - best.expected_loss, at_d, "posterior regret")
}

fn members_for_regret(class: &LossClass) -> Result<Vec<Loss>> {
    Ok(match class {
        LossClass::Envelope(e) => alloc::vec![e.upper().clone(), e.lower().clone()],
        LossClass::Finite(f) => f.losses().to_vec(),
        LossClass::PriorRatio(p) => p.losses(),
        LossClass::Band(_) => bail!(
            Unsupported,
            "supremum regret is not available for band classes"
        ),
    })
}

/// Supremum regret over the class. For an envelope class this is the larger
/// of the two envelope regrets; for a finite class the largest member regret.
pub fn sup_regret(
    class: &LossClass,
    post: &Posterior,
    d: f64,
    bracket: Option<Interval>,
) -> Result<f64> {
    let mut sup = 0.0f64;
    for l in members_for_regret(class)? {
        sup = sup.max(regret(&l, post, d, bracket)?);
    }
    Ok(sup)
}

/// `S^n(d) - I^n(d)`.
pub fn range_band(band: &BandClass, post: &Posterior, d: f64) -> Result<f64> {
    let s = expected_loss(band.upper(), post, d)?;
    let i = expected_loss(band.lower(), post, d)?;
    let r = s - i;
    if r < -NEGATIVE_TOL * s.abs().max(1.0) {
        bail!(BandViolation, "S^n(d) - I^n(d) = {r:e} < 0 at d = {d}");
    }
    Ok(r.max(0.0))
}

/// Range of the posterior expected loss over the class at `d`. Envelope and
/// prior-ratio classes use their band when they carry one.
pub fn range(class: &LossClass, post: &Posterior, d: f64) -> Result<f64> {
    match class {
        LossClass::Band(b) => range_band(b, post, d),
        LossClass::Envelope(e) => match e.band() {
            Some(b) => range_band(b, post, d),
            None => bail!(
                Unsupported,
                "envelope class without a band has no computable range"
            ),
        },
        LossClass::PriorRatio(p) => match p.to_band() {
            Ok(b) => range_band(&b, post, d),
            Err(_) => range_finite(&p.losses(), post, d),
        },
        LossClass::Finite(f) => range_finite(f.losses(), post, d),
    }
}

fn range_finite(losses: &[Loss], post: &Posterior, d: f64) -> Result<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for l in losses {
        let v = expected_loss(l, post, d)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(hi - lo)
}

/// The reference loss of a class, if it has one.
pub fn reference_loss(class: &LossClass) -> Option<Loss> {
    match class {
        LossClass::Envelope(e) => Some(e.reference().clone()),
        LossClass::Band(b) => Some(b.reference().clone()),
        LossClass::PriorRatio(p) => p.to_band().ok().map(|b| b.reference().clone()),
        LossClass::Finite(_) => None,
    }
}

/// The three measures at one reference decision. Measures a class does not
/// support are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    pub action_set: Option<ActionSet>,
    pub diameter: Option<f64>,
    pub sup_regret: Option<f64>,
    pub range: Option<f64>,
    pub reference_decision: f64,
}

impl RobustnessReport {
    /// Evaluates every measure the class supports at `reference`, or at the
    /// Bayes action of the class's reference loss when `reference` is `None`.
    pub fn compute(
        class: &LossClass,
        post: &Posterior,
        reference: Option<f64>,
        bracket: Option<Interval>,
    ) -> Result<Self> {
        let d = match reference {
            Some(d) => d,
            None => match reference_loss(class) {
                Some(l0) => bayes_action_detailed(&l0, post, bracket)?.d,
                None => bail!(
                    Precondition,
                    "a finite class needs an explicit reference decision"
                ),
            },
        };
        let optional = |r: Result<f64>| match r {
            Ok(v) => Ok(Some(v)),
            Err(Error::Unsupported(_)) => Ok(None),
            Err(e) => Err(e),
        };
        let action_set = match action_set(class, post, bracket) {
            Ok(s) => Some(s),
            Err(Error::Unsupported(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            diameter: action_set.as_ref().map(ActionSet::diameter),
            action_set,
            sup_regret: optional(sup_regret(class, post, d, bracket))?,
            range: optional(range(class, post, d))?,
            reference_decision: d,
        })
    }
}

/// Default search interval for `argmin l(theta, .)`.
pub fn default_limit_bracket(theta: f64) -> Interval {
    let half = 10.0 * (1.0 + theta.abs());
    (theta - half, theta + half)
}

/// `d_l = argmin_d l(theta, d)`, refined by a root search on `D01 l(theta, .)`.
pub fn minimizer_at(loss: &Loss, theta: f64, bracket: Option<Interval>) -> Result<f64> {
    let (a, b) = bracket.unwrap_or_else(|| default_limit_bracket(theta));
    let f = |d: f64| match loss.try_value(theta, d) {
        Ok(v) if !v.is_nan() => v,
        _ => f64::INFINITY,
    };
    let m = brent(f, a, b, 1e-12, 1000);
    if !m.fx.is_finite() {
        bail!(
            Numerical,
            "{} is not finite near its minimum at theta = {theta}",
            loss.label()
        );
    }
    let edge = 1e-6 * (b - a);
    if (m.x - a < edge && f(a) <= m.fx) || (b - m.x < edge && f(b) <= m.fx) {
        bail!(
            Bracketing,
            "minimum of {}(theta, .) lies on the edge of [{a}, {b}]",
            loss.label()
        );
    }
    let g = |d: f64| loss.partial(Partial::D01, theta, d);
    let delta = 1e-5 * (1.0 + m.x.abs());
    let (lo, hi) = ((m.x - delta).max(a), (m.x + delta).min(b));
    if !loss.near_kink(theta, m.x, 2.0 * delta) && g(lo) <= 0.0 && g(hi) >= 0.0 {
        if let Some(r) = find_root(g, lo, hi, 1e-15 * (1.0 + m.x.abs()), 200) {
            if f(r) <= m.fx + 1e-12 * (1.0 + m.fx.abs()) {
                return Ok(r);
            }
        }
    }
    Ok(m.x)
}

/// `phi(l) = D11 l(theta, d_l) / D02 l(theta, d_l)`, the sensitivity of the
/// minimizer to the parameter: `d_l(sigma) ~ d_l - phi(l) (sigma - theta)`.
pub fn phi(loss: &Loss, theta: f64, bracket: Option<Interval>) -> Result<f64> {
    let d = minimizer_at(loss, theta, bracket)?;
    phi_at(loss, theta, d)
}

fn phi_at(loss: &Loss, theta: f64, d: f64) -> Result<f64> {
    if loss.near_kink(theta, d, 1e-6) {
        bail!(
            Singular,
            "D02 {}(theta, d) does not exist at the registered kink (theta, d) = ({theta}, {d})",
            loss.label()
        );
    }
    let d02 = loss.partial(Partial::D02, theta, d);
    if !(d02.abs() > D02_FLOOR) {
        bail!(
            Singular,
            "|D02 {}(theta, d_l)| = {d02:e} at ({theta}, {d})",
            loss.label()
        );
    }
    Ok(loss.partial(Partial::D11, theta, d) / d02)
}

fn limit_members(class: &LossClass) -> Result<Vec<Loss>> {
    Ok(match class {
        LossClass::Envelope(e) => alloc::vec![e.upper().clone(), e.lower().clone()],
        LossClass::Finite(f) => f.losses().to_vec(),
        LossClass::PriorRatio(p) => p.losses(),
        LossClass::Band(_) => bail!(
            Unsupported,
            "limit diameter is not available for band classes"
        ),
    })
}

/// `max_l d_l - min_l d_l` over the envelopes or members at `theta`.
pub fn limit_diameter(class: &LossClass, theta: f64, bracket: Option<Interval>) -> Result<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for l in limit_members(class)? {
        let d = minimizer_at(&l, theta, bracket)?;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    Ok(hi - lo)
}

/// `reg_l(d) = l(theta, d) - min l(theta, .)`.
pub fn limit_regret(loss: &Loss, theta: f64, d: f64, bracket: Option<Interval>) -> Result<f64> {
    let dl = minimizer_at(loss, theta, bracket)?;
    let r = loss.try_value(theta, d)? - loss.try_value(theta, dl)?;
    clamp(r, loss.value(theta, d), "limit regret")
}

/// `max_l reg_l(d_0)` with `d_0 = argmin l0(theta, .)`.
pub fn limit_sup_regret(
    class: &LossClass,
    l0: &Loss,
    theta: f64,
    bracket: Option<Interval>,
) -> Result<f64> {
    let d0 = minimizer_at(l0, theta, bracket)?;
    let mut sup = 0.0f64;
    for l in members_for_regret(class)? {
        sup = sup.max(limit_regret(&l, theta, d0, bracket)?);
    }
    Ok(sup)
}

/// The coefficient `c(l)` with `sqrt(n) (reg_l^n(d_0^n) - reg_l(d_0)) => c(l) Z`:
/// `-D01 l(theta, d_0) phi(l0) + D10 l(theta, d_0) - D10 l(theta, d_l)`.
pub fn limit_regret_coeff(
    loss: &Loss,
    l0: &Loss,
    theta: f64,
    bracket: Option<Interval>,
) -> Result<f64> {
    let d0 = minimizer_at(l0, theta, bracket)?;
    let dl = minimizer_at(loss, theta, bracket)?;
    let phi0 = phi_at(l0, theta, d0)?;
    Ok(
        -loss.partial(Partial::D01, theta, d0) * phi0 + loss.partial(Partial::D10, theta, d0)
            - loss.partial(Partial::D10, theta, dl),
    )
}

/// For a loss sharing its minimizer with `l0`, the coefficient `q` with
/// `n reg_l^n(d_0^n) => q Z^2`: `q = 0.5 (phi(l0) - phi(l))^2 D02 l(theta, d_l)`.
pub fn limit_regret_quadform(
    loss: &Loss,
    l0: &Loss,
    theta: f64,
    bracket: Option<Interval>,
) -> Result<f64> {
    let d0 = minimizer_at(l0, theta, bracket)?;
    let dl = minimizer_at(loss, theta, bracket)?;
    if (d0 - dl).abs() > SHARED_MINIMIZER_TOL * (1.0 + d0.abs()) {
        bail!(
            Precondition,
            "minimizers differ ({dl} for {} vs {d0} for {}); use the first-order regret coefficient instead",
            loss.label(),
            l0.label()
        );
    }
    let diff = phi_at(l0, theta, d0)? - phi_at(loss, theta, dl)?;
    Ok(0.5 * diff * diff * loss.partial(Partial::D02, theta, dl))
}

/// Second-order posterior correction `L_f = I_theta Hf(theta) m2`, where `m2` is
/// the second moment of the standardized limit law of the posterior.
pub fn l_f(hessian_at_theta: f64, i_theta: f64, second_moment: f64) -> f64 {
    i_theta * hessian_at_theta * second_moment
}

/// Limits of the range of a band at `d_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeLimit {
    /// `S(theta, d_0) - I(theta, d_0)`.
    pub at_theta: f64,
    /// Coefficient `b` with `sqrt(n) (ran^n - ran) => b Z`.
    pub first_order: f64,
    pub n_s: f64,
    pub n_i: f64,
    pub l_s: f64,
    pub l_i: f64,
}

impl RangeLimit {
    /// Mean of the second-order limit `0.5 (Z^2 (N_S - N_I) + L_S - L_I)` when
    /// `Z` has variance `i_theta`.
    pub fn second_order_mean(&self, i_theta: f64) -> f64 {
        0.5 * (i_theta * (self.n_s - self.n_i) + self.l_s - self.l_i)
    }
}

fn second_order(loss: &Loss, theta: f64, d0: f64, phi0: f64) -> f64 {
    let d02 = loss.partial(Partial::D02, theta, d0);
    let d20 = loss.partial(Partial::D20, theta, d0);
    let d11 = loss.partial(Partial::D11, theta, d0);
    phi0 * phi0 * d02 + d20 - 2.0 * d11 * phi0
}

/// Limit coefficients of the range `S^n(d_0^n) - I^n(d_0^n)`: the
/// first-order coefficient `D10(S - I) - D01(S - I) phi(l0)` and the
/// second-order terms `N_S`, `N_I`, `L_S`, `L_I`, all at `(theta, d_0)`.
pub fn limit_range_coeffs(
    band: &BandClass,
    theta: f64,
    i_theta: f64,
    second_moment: f64,
    bracket: Option<Interval>,
) -> Result<RangeLimit> {
    let l0 = band.reference();
    let d0 = minimizer_at(l0, theta, bracket)?;
    let phi0 = phi_at(l0, theta, d0)?;
    let (s, i) = (band.upper(), band.lower());
    let diff = |p: Partial| s.partial(p, theta, d0) - i.partial(p, theta, d0);
    Ok(RangeLimit {
        at_theta: s.value(theta, d0) - i.value(theta, d0),
        first_order: diff(Partial::D10) - diff(Partial::D01) * phi0,
        n_s: second_order(s, theta, d0, phi0),
        n_i: second_order(i, theta, d0, phi0),
        l_s: l_f(s.partial(Partial::D20, theta, d0), i_theta, second_moment),
        l_i: l_f(i.partial(Partial::D20, theta, d0), i_theta, second_moment),
    })
}

/// Per-loss limit quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct LossLimit {
    pub label: String,
    pub minimizer: f64,
    /// `None` when `D02` vanishes or does not exist at the minimizer.
    pub phi: Option<f64>,
    /// First-order regret coefficient.
    pub regret_coeff: Option<f64>,
    /// Second-order regret coefficient; only for minimizers shared with `l0`.
    pub quad_form: Option<f64>,
    /// `reg_l(d_0)`.
    pub regret_at_reference: f64,
}

/// Every limit quantity for a class around the reference loss `l0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitQuantities {
    pub theta: f64,
    pub i_theta: f64,
    pub second_moment: f64,
    pub reference_minimizer: f64,
    pub phi_reference: Option<f64>,
    pub losses: Vec<LossLimit>,
    pub limit_diameter: Option<f64>,
    pub limit_sup_regret: Option<f64>,
    pub range: Option<RangeLimit>,
}

impl LimitQuantities {
    pub fn compute(
        class: &LossClass,
        l0: &Loss,
        theta: f64,
        i_theta: f64,
        second_moment: f64,
        bracket: Option<Interval>,
    ) -> Result<Self> {
        let d0 = minimizer_at(l0, theta, bracket)?;
        let phi0 = phi_at(l0, theta, d0).ok();
        let reps = match limit_members(class) {
            Ok(m) => m,
            Err(_) => class.representatives(),
        };
        let mut losses = Vec::with_capacity(reps.len());
        for l in &reps {
            let dl = minimizer_at(l, theta, bracket)?;
            let phi_l = phi_at(l, theta, dl).ok();
            let regret_coeff = phi0.map(|p0| {
                -l.partial(Partial::D01, theta, d0) * p0 + l.partial(Partial::D10, theta, d0)
                    - l.partial(Partial::D10, theta, dl)
            });
            let shared = (d0 - dl).abs() <= SHARED_MINIMIZER_TOL * (1.0 + d0.abs());
            let quad_form = match (shared, phi0, phi_l) {
                (true, Some(p0), Some(pl)) => {
                    Some(0.5 * (p0 - pl) * (p0 - pl) * l.partial(Partial::D02, theta, dl))
                }
                _ => None,
            };
            let regret_at_reference = (l.value(theta, d0) - l.value(theta, dl)).max(0.0);
            losses.push(LossLimit {
                label: String::from(l.label()),
                minimizer: dl,
                phi: phi_l,
                regret_coeff,
                quad_form,
                regret_at_reference,
            });
        }
        let optional = |r: Result<f64>| match r {
            Ok(v) => Ok(Some(v)),
            Err(Error::Unsupported(_)) => Ok(None),
            Err(e) => Err(e),
        };
        let band = match class {
            LossClass::Band(b) => Some(b.clone()),
            LossClass::Envelope(e) => e.band().cloned(),
            LossClass::PriorRatio(p) => p.to_band().ok(),
            LossClass::Finite(_) => None,
        };
        let range = match &band {
            Some(b) if phi0.is_some() => Some(limit_range_coeffs(
                b,
                theta,
                i_theta,
                second_moment,
                bracket,
            )?),
            _ => None,
        };
        Ok(Self {
            theta,
            i_theta,
            second_moment,
            reference_minimizer: d0,
            phi_reference: phi0,
            limit_diameter: optional(limit_diameter(class, theta, bracket))?,
            limit_sup_regret: optional(limit_sup_regret(class, l0, theta, bracket))?,
            losses,
            range,
        })
    }
}
