//! Loss functions `l(sigma, d)` with their partial derivatives, the loss
//! classes built from them, and pointwise checks of the regularity
//! assumptions at a candidate parameter value.

mod classes;
mod diagnostics;

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{bail, Result};
use crate::special::normal_cdf;

pub use classes::{AuditBox, BandClass, EnvelopeClass, FiniteClass, LossClass, PriorRatioClass};
pub use diagnostics::{
    class_diagnostics, class_diagnostics_on, AssumptionCheck, ClassDiagnostics, LossDiagnostics,
    Verdict,
};

type Surface = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Validity = Arc<dyn Fn(f64, f64) -> Result<()> + Send + Sync>;
type KinkLocus = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;
/// A scalar function of one real variable, shared across threads.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Partial derivatives of `l(sigma, d)`. The first index counts derivatives in
/// `sigma`, the second in `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Partial {
    D01,
    D10,
    D02,
    D11,
    D20,
}

impl Partial {
    pub const ALL: [Partial; 5] = [
        Partial::D01,
        Partial::D10,
        Partial::D02,
        Partial::D11,
        Partial::D20,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Partial::D01 => "D01",
            Partial::D10 => "D10",
            Partial::D02 => "D02",
            Partial::D11 => "D11",
            Partial::D20 => "D20",
        }
    }
}

/// Relative step for first-order central differences.
pub const FD_STEP: f64 = 1e-5;
/// Relative step for second-order stencils.
pub const FD_STEP_SECOND: f64 = 1e-4;

fn step(x: f64, rel: f64) -> f64 {
    x.abs().max(1.0) * rel
}

/// A nonnegative loss `l(sigma, d)`.
///
/// Partials are analytic where supplied and central finite differences
/// otherwise. A loss may register the `sigma` locations where `l(., d)` is not
/// smooth; quadrature splits there and derivative-based asymptotics refuse to
/// run on them.
#[derive(Clone)]
pub struct Loss {
    label: String,
    value: Surface,
    partials: [Option<Surface>; 5],
    kinks: Option<KinkLocus>,
    validity: Option<Validity>,
}

impl core::fmt::Debug for Loss {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let analytic: Vec<&str> = Partial::ALL
            .iter()
            .filter(|p| self.has_analytic(**p))
            .map(|p| p.name())
            .collect();
        f.debug_struct("Loss")
            .field("label", &self.label)
            .field("analytic", &analytic)
            .field("kinked", &self.kinks.is_some())
            .finish()
    }
}

impl Loss {
    pub fn new(
        label: impl Into<String>,
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            value: Arc::new(value),
            partials: Default::default(),
            kinks: None,
            validity: None,
        }
    }

    pub fn with_partial(
        mut self,
        which: Partial,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.partials[which.index()] = Some(Arc::new(f));
        self
    }

    /// Registers the `sigma` values at which `l(., d)` is non-smooth, as a
    /// function of `d`.
    pub fn with_kinks(mut self, f: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.kinks = Some(Arc::new(f));
        self
    }

    /// Restricts the domain: `check(sigma, d)` returns a domain error outside it.
    pub fn with_validity(
        mut self,
        check: impl Fn(f64, f64) -> Result<()> + Send + Sync + 'static,
    ) -> Self {
        self.validity = Some(Arc::new(check));
        self
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `l(sigma, d)` without domain checks.
    #[inline]
    pub fn value(&self, sigma: f64, d: f64) -> f64 {
        (self.value)(sigma, d)
    }

    pub fn check(&self, sigma: f64, d: f64) -> Result<()> {
        match &self.validity {
            Some(v) => v(sigma, d),
            None => Ok(()),
        }
    }

    pub fn try_value(&self, sigma: f64, d: f64) -> Result<f64> {
        self.check(sigma, d)?;
        Ok(self.value(sigma, d))
    }

    pub fn has_analytic(&self, which: Partial) -> bool {
        self.partials[which.index()].is_some()
    }

    pub fn kinks_at(&self, d: f64) -> Vec<f64> {
        match &self.kinks {
            Some(k) => k(d),
            None => Vec::new(),
        }
    }

    pub fn has_kinks(&self) -> bool {
        self.kinks.is_some()
    }

    /// Whether `(sigma, d)` lies within `tol` of a registered kink.
    pub fn near_kink(&self, sigma: f64, d: f64, tol: f64) -> bool {
        self.kinks_at(d).iter().any(|k| (sigma - k).abs() < tol)
    }

    /// The requested partial: analytic when available, otherwise a central
    /// finite difference.
    pub fn partial(&self, which: Partial, sigma: f64, d: f64) -> f64 {
        match &self.partials[which.index()] {
            Some(f) => f(sigma, d),
            None => self.finite_difference(which, sigma, d),
        }
    }

    pub fn analytic_partial(&self, which: Partial, sigma: f64, d: f64) -> Option<f64> {
        self.partials[which.index()].as_ref().map(|f| f(sigma, d))
    }

    /// Central finite-difference approximation of a partial, ignoring any
    /// analytic formula.
    pub fn finite_difference(&self, which: Partial, s: f64, d: f64) -> f64 {
        let l = |s: f64, d: f64| self.value(s, d);
        match which {
            Partial::D01 => {
                let h = step(d, FD_STEP);
                (l(s, d + h) - l(s, d - h)) / (2.0 * h)
            }
            Partial::D10 => {
                let h = step(s, FD_STEP);
                (l(s + h, d) - l(s - h, d)) / (2.0 * h)
            }
            Partial::D02 => {
                let h = step(d, FD_STEP_SECOND);
                (l(s, d + h) - 2.0 * l(s, d) + l(s, d - h)) / (h * h)
            }
            Partial::D20 => {
                let h = step(s, FD_STEP_SECOND);
                (l(s + h, d) - 2.0 * l(s, d) + l(s - h, d)) / (h * h)
            }
            Partial::D11 => {
                let hs = step(s, FD_STEP_SECOND);
                let hd = step(d, FD_STEP_SECOND);
                (l(s + hs, d + hd) - l(s + hs, d - hd) - l(s - hs, d + hd) + l(s - hs, d - hd))
                    / (4.0 * hs * hd)
            }
        }
    }

    /// `c * l`, with analytic partials, kinks and domain carried over.
    pub fn scaled(&self, c: f64) -> Loss {
        let value = self.value.clone();
        let mut out = Loss {
            label: format!("{c}*{}", self.label),
            value: Arc::new(move |s, d| c * value(s, d)),
            partials: Default::default(),
            kinks: self.kinks.clone(),
            validity: self.validity.clone(),
        };
        for (slot, src) in out.partials.iter_mut().zip(self.partials.iter()) {
            if let Some(f) = src.clone() {
                *slot = Some(Arc::new(move |s, d| c * f(s, d)));
            }
        }
        out
    }

    /// `t * a + (1 - t) * b` for `t` in `[0, 1]`. Blending the two envelope
    /// losses of a class yields members of the class.
    pub fn convex_blend(a: &Loss, b: &Loss, t: f64) -> Loss {
        let (va, vb) = (a.value.clone(), b.value.clone());
        let mut out = Loss {
            label: format!("{t}*{}+{}*{}", a.label, 1.0 - t, b.label),
            value: Arc::new(move |s, d| t * va(s, d) + (1.0 - t) * vb(s, d)),
            partials: Default::default(),
            kinks: None,
            validity: None,
        };
        for (i, slot) in out.partials.iter_mut().enumerate() {
            if let (Some(fa), Some(fb)) = (a.partials[i].clone(), b.partials[i].clone()) {
                *slot = Some(Arc::new(move |s, d| t * fa(s, d) + (1.0 - t) * fb(s, d)));
            }
        }
        if a.kinks.is_some() || b.kinks.is_some() {
            let (ka, kb) = (a.clone(), b.clone());
            out.kinks = Some(Arc::new(move |d| {
                let mut v = ka.kinks_at(d);
                v.extend(kb.kinks_at(d));
                v
            }));
        }
        if a.validity.is_some() || b.validity.is_some() {
            let (ca, cb) = (a.clone(), b.clone());
            out.validity = Some(Arc::new(move |s, d| {
                ca.check(s, d)?;
                cb.check(s, d)
            }));
        }
        out
    }
}

/// `0.5 (d - sigma)^2`, the convenient squared-error loss.
pub fn half_squared_error() -> Loss {
    Loss::new("l0", |s, d| 0.5 * (d - s) * (d - s))
        .with_partial(Partial::D01, |s, d| d - s)
        .with_partial(Partial::D10, |s, d| s - d)
        .with_partial(Partial::D02, |_, _| 1.0)
        .with_partial(Partial::D11, |_, _| -1.0)
        .with_partial(Partial::D20, |_, _| 1.0)
}

/// Squared error with weights `k_over` when `d >= sigma` and `k_under` when
/// `d < sigma`: `(k_over 1{d >= sigma} + k_under 1{d < sigma}) 0.5 (d - sigma)^2`.
///
/// The second partials are one-sided on the kink `d = sigma`, which is
/// registered.
pub fn asymmetric_quadratic(label: impl Into<String>, k_over: f64, k_under: f64) -> Loss {
    let k = move |s: f64, d: f64| if d >= s { k_over } else { k_under };
    Loss::new(label, move |s, d| k(s, d) * 0.5 * (d - s) * (d - s))
        .with_partial(Partial::D01, move |s, d| k(s, d) * (d - s))
        .with_partial(Partial::D10, move |s, d| -k(s, d) * (d - s))
        .with_partial(Partial::D02, k)
        .with_partial(Partial::D11, move |s, d| -k(s, d))
        .with_partial(Partial::D20, k)
        .with_kinks(|d| vec![d])
}

/// The asymmetric squared-error class around `0.5 (d - sigma)^2`: the envelope
/// losses put weight `k2` on overestimation for `U` and on underestimation for
/// `L`. The class also carries the band `[k1 l0, k2 l0]`.
pub fn make_asymmetric_quadratic(k1: f64, k2: f64) -> Result<EnvelopeClass> {
    if !(k1 > 0.0 && k1.is_finite() && k2.is_finite()) {
        bail!(
            Domain,
            "asymmetric quadratic weights must be positive and finite, got ({k1}, {k2})"
        );
    }
    if k1 >= k2 {
        bail!(
            Domain,
            "asymmetric quadratic needs k1 < k2, got ({k1}, {k2})"
        );
    }
    asymmetric_quadratic_class(k1, k2)
}

/// Same as [`make_asymmetric_quadratic`] but admits the degenerate symmetric
/// case `k1 = k2`.
pub fn asymmetric_quadratic_class(k1: f64, k2: f64) -> Result<EnvelopeClass> {
    if !(k1 > 0.0 && k1 <= k2) {
        bail!(
            Domain,
            "asymmetric quadratic needs 0 < k1 <= k2, got ({k1}, {k2})"
        );
    }
    let upper = asymmetric_quadratic("U", k2, k1);
    let lower = asymmetric_quadratic("L", k1, k2);
    let reference = half_squared_error();
    let audit = AuditBox::new((-3.0, 3.0), (-3.0, 3.0));
    let envelope = EnvelopeClass::new(upper, lower, reference.clone(), audit)?;
    let band = BandClass::new(
        reference.scaled(k1).relabel("I"),
        reference.scaled(k2).relabel("S"),
        reference,
        audit,
    )?;
    Ok(envelope.with_band(band))
}

/// Smooth counterpart of the asymmetric quadratic class built from
/// `f(t) = exp(-t) + t - 1`: lower envelope `f(d - sigma)`, upper envelope
/// `f(sigma - d)`, reference `0.5 (d - sigma)^2`. Every member is twice
/// differentiable, so the Bayes actions merge as the posterior concentrates.
pub fn smooth_translation_class() -> Result<EnvelopeClass> {
    let f = TranslationProfile::exp_linear();
    let lower = make_translation_loss(&f)?.relabel("L~");
    let upper = make_translation_loss(&f.mirrored())?.relabel("U~");
    EnvelopeClass::new(
        upper,
        lower,
        half_squared_error(),
        AuditBox::new((-3.0, 3.0), (-3.0, 3.0)),
    )
}

/// Flood-cost loss `10 d + 100 exp(-d sigma) / sigma` and its envelope.
#[derive(Debug, Clone)]
pub struct DamLosses {
    /// `{U, L}` as a finite class.
    pub finite: FiniteClass,
    pub reference: Loss,
    pub envelope: EnvelopeClass,
}

fn dam_validity(s: f64, d: f64) -> Result<()> {
    if !(s > 0.0) {
        bail!(Domain, "dam losses need sigma > 0, got {s}");
    }
    if !(d >= 0.0) {
        bail!(Domain, "dam losses need d >= 0, got {d}");
    }
    Ok(())
}

fn dam_base(s: f64, d: f64) -> f64 {
    10.0 * d + 100.0 * (-d * s).exp() / s
}

/// The dam-height losses: `l0(sigma, d) = 10 d + 100 exp(-d sigma) / sigma`
/// with envelopes `U = (Phi(d sigma - log 10) + 0.5) l0` and
/// `L = (1.5 - Phi(d sigma - log 10)) l0`. Partials are finite differences.
pub fn make_dam_losses() -> Result<DamLosses> {
    let ln10 = core::f64::consts::LN_10;
    let reference = Loss::new("l0", dam_base).with_validity(dam_validity);
    let upper = Loss::new("U", move |s, d| {
        (normal_cdf(d * s - ln10) + 0.5) * dam_base(s, d)
    })
    .with_validity(dam_validity);
    let lower = Loss::new("L", move |s, d| {
        (1.5 - normal_cdf(d * s - ln10)) * dam_base(s, d)
    })
    .with_validity(dam_validity);
    let audit = AuditBox::new((0.1, 2.0), (0.0, 30.0));
    let band = BandClass::new(
        reference.scaled(0.5).relabel("I"),
        reference.scaled(1.5).relabel("S"),
        reference.clone(),
        audit,
    )?;
    let envelope =
        EnvelopeClass::new(upper.clone(), lower.clone(), reference.clone(), audit)?.with_band(band);
    let finite = FiniteClass::new(vec![upper, lower])?.with_audit(audit);
    Ok(DamLosses {
        finite,
        reference,
        envelope,
    })
}

/// A profile `f` for translation losses `l(sigma, d) = f(d - sigma)`, with its
/// first three derivatives.
#[derive(Clone)]
pub struct TranslationProfile {
    pub label: String,
    pub f: ScalarFn,
    pub f1: ScalarFn,
    pub f2: ScalarFn,
    pub f3: ScalarFn,
}

impl TranslationProfile {
    pub fn new<F, F1, F2, F3>(label: impl Into<String>, f: F, f1: F1, f2: F2, f3: F3) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        F1: Fn(f64) -> f64 + Send + Sync + 'static,
        F2: Fn(f64) -> f64 + Send + Sync + 'static,
        F3: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            f: Arc::new(f),
            f1: Arc::new(f1),
            f2: Arc::new(f2),
            f3: Arc::new(f3),
        }
    }

    /// `t^2`.
    pub fn squared() -> Self {
        Self::new("t^2", |t| t * t, |t| 2.0 * t, |_| 2.0, |_| 0.0)
    }

    /// `exp(-t) + t - 1`, smooth and asymmetric.
    pub fn exp_linear() -> Self {
        Self::new(
            "exp(-t)+t-1",
            |t| (-t).exp() + t - 1.0,
            |t| 1.0 - (-t).exp(),
            |t| (-t).exp(),
            |t| -(-t).exp(),
        )
    }

    /// `t -> f(-t)`.
    pub fn mirrored(&self) -> Self {
        let (f, f1, f2, f3) = (
            self.f.clone(),
            self.f1.clone(),
            self.f2.clone(),
            self.f3.clone(),
        );
        Self {
            label: format!("{}(-t)", self.label),
            f: Arc::new(move |t| f(-t)),
            f1: Arc::new(move |t| -f1(-t)),
            f2: Arc::new(move |t| f2(-t)),
            f3: Arc::new(move |t| -f3(-t)),
        }
    }
}

/// `l(sigma, d) = f(d - sigma)`; requires `f(0) = 0` and `f >= 0` (checked on
/// a sample of `[-10, 10]`).
pub fn make_translation_loss(profile: &TranslationProfile) -> Result<Loss> {
    let f0 = (profile.f)(0.0);
    if f0.abs() > 1e-12 {
        bail!(
            Domain,
            "translation profile {} must vanish at 0, got f(0) = {f0}",
            profile.label
        );
    }
    for i in 0..=400 {
        let t = -10.0 + 0.05 * i as f64;
        let v = (profile.f)(t);
        if !(v >= -1e-12) {
            bail!(
                Domain,
                "translation profile {} is negative at t = {t} (f = {v})",
                profile.label
            );
        }
    }
    let (f, f1, f2) = (profile.f.clone(), profile.f1.clone(), profile.f2.clone());
    let (g1, g2, h1, h2, k2) = (f1.clone(), f2.clone(), f1.clone(), f2.clone(), f2.clone());
    Ok(Loss::new(profile.label.clone(), move |s, d| f(d - s))
        .with_partial(Partial::D01, move |s, d| g1(d - s))
        .with_partial(Partial::D10, move |s, d| -h1(d - s))
        .with_partial(Partial::D02, move |s, d| g2(d - s))
        .with_partial(Partial::D11, move |s, d| -h2(d - s))
        .with_partial(Partial::D20, move |s, d| k2(d - s)))
}

/// The loss `(d - a(sigma))^2 w(sigma) / w0(sigma)` that turns prior
/// sensitivity into loss sensitivity: its Bayes action under the `w0`
/// posterior is the posterior mean of `a` under prior `w`.
pub fn prior_ratio_to_loss(w: ScalarFn, w0: ScalarFn, a: ScalarFn) -> Loss {
    let (wv, w0v, av) = (w.clone(), w0.clone(), a.clone());
    let ratio = move |s: f64| w(s) / w0(s);
    let r1 = ratio.clone();
    let r2 = ratio.clone();
    let a1 = a.clone();
    Loss::new("prior-ratio", move |s, d| {
        let e = d - av(s);
        e * e * ratio(s)
    })
    .with_partial(Partial::D01, move |s, d| 2.0 * (d - a1(s)) * r1(s))
    .with_partial(Partial::D02, move |s, _| 2.0 * r2(s))
    .with_validity(move |s, _| {
        let base = w0v(s);
        if !(base > 0.0) {
            bail!(Domain, "base prior density vanishes at sigma = {s}");
        }
        if !(wv(s) >= 0.0) {
            bail!(Domain, "prior density is negative at sigma = {s}");
        }
        Ok(())
    })
}

/// A loss that is identically zero.
pub fn constant_zero() -> Loss {
    let mut l = Loss::new("zero", |_, _| 0.0);
    for p in Partial::ALL {
        l = l.with_partial(p, |_, _| 0.0);
    }
    l
}

/// Outcome of comparing the analytic partials of a loss with finite
/// differences.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeAudit {
    pub checked: usize,
    pub skipped_near_kink: usize,
    pub worst_relative_error: f64,
    pub failures: Vec<(Partial, f64, f64, f64, f64)>,
}

impl DerivativeAudit {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Compares each analytic partial with its finite difference at `points`,
/// skipping those within `1e-3` of a registered kink. The error is taken
/// relative to `max(1, |analytic|)`.
pub fn audit_partials(loss: &Loss, points: &[(f64, f64)], rel_tol: f64) -> DerivativeAudit {
    let mut audit = DerivativeAudit {
        checked: 0,
        skipped_near_kink: 0,
        worst_relative_error: 0.0,
        failures: Vec::new(),
    };
    for &(s, d) in points {
        if loss.near_kink(s, d, 1e-3) {
            audit.skipped_near_kink += 1;
            continue;
        }
        if loss.check(s, d).is_err() {
            continue;
        }
        for p in Partial::ALL {
            if let Some(exact) = loss.analytic_partial(p, s, d) {
                let fd = loss.finite_difference(p, s, d);
                let err = (exact - fd).abs() / exact.abs().max(1.0);
                audit.checked += 1;
                audit.worst_relative_error = audit.worst_relative_error.max(err);
                if !(err <= rel_tol) {
                    audit.failures.push((p, s, d, exact, fd));
                }
            }
        }
    }
    audit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn asymmetric_quadratic_values() {
        let class = make_asymmetric_quadratic(1.0, 2.0).unwrap();
        assert_eq!(class.upper().value(0.0, 1.0), 1.0);
        assert_eq!(class.upper().value(0.0, -1.0), 0.5);
        assert_eq!(class.upper().partial(Partial::D01, 0.0, 1.0), 2.0);
        assert_eq!(class.lower().partial(Partial::D01, 0.0, 1.0), 1.0);
        assert_eq!(class.reference().partial(Partial::D01, 0.0, 1.0), 1.0);
    }

    #[test]
    fn asymmetric_quadratic_rejects_bad_weights() {
        assert!(matches!(
            make_asymmetric_quadratic(2.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            make_asymmetric_quadratic(1.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            make_asymmetric_quadratic(0.0, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn near_symmetric_weights_approach_reference() {
        let l0 = half_squared_error();
        for eps in [1e-2, 1e-4, 1e-8] {
            let class = make_asymmetric_quadratic(1.0, 1.0 + eps).unwrap();
            for &(s, d) in &[(0.0, 1.0), (1.0, -2.0), (0.3, 0.7)] {
                assert!(
                    (class.upper().value(s, d) - l0.value(s, d)).abs()
                        <= eps * l0.value(s, d) + 1e-15
                );
            }
        }
    }

    #[test]
    fn dam_losses_basic_identities() {
        let dam = make_dam_losses().unwrap();
        let (u, l, l0) = (dam.envelope.upper(), dam.envelope.lower(), &dam.reference);
        let d_star = core::f64::consts::LN_10 / 0.5;
        assert!((u.value(0.5, d_star) - l0.value(0.5, d_star)).abs() < 1e-12);
        for &(s, d) in &[(0.5, 1.0), (1.3, 7.0), (0.2, 0.0)] {
            assert!(
                (u.value(s, d) + l.value(s, d) - 2.0 * l0.value(s, d)).abs()
                    < 1e-10 * l0.value(s, d)
            );
        }
        assert!(l0.try_value(0.0, 1.0).is_err());
        assert!(l0.try_value(0.5, -1.0).is_err());
    }

    #[test]
    fn dam_reference_minimum_is_at_log10_over_sigma() {
        let dam = make_dam_losses().unwrap();
        let m = crate::minimize::brent(|d| dam.reference.value(0.5, d), 0.0, 30.0, 1e-10, 200);
        assert!((m.x - core::f64::consts::LN_10 / 0.5).abs() < 1e-6);
    }

    #[test]
    fn translation_losses() {
        let smooth = make_translation_loss(&TranslationProfile::exp_linear()).unwrap();
        assert_eq!(smooth.value(1.0, 1.0), 0.0);
        assert!((smooth.partial(Partial::D02, 0.0, 0.0) - 1.0).abs() < 1e-15);

        let sq = make_translation_loss(&TranslationProfile::squared()).unwrap();
        for &(s, d) in &[(0.0, 0.0), (1.0, -3.0), (-2.0, 5.0)] {
            assert_eq!(sq.partial(Partial::D02, s, d), 2.0);
            assert_eq!(sq.partial(Partial::D11, s, d), -2.0);
            assert_eq!(sq.value(s, d), (d - s) * (d - s));
        }

        let shifted =
            TranslationProfile::new("t^2+1", |t| t * t + 1.0, |t| 2.0 * t, |_| 2.0, |_| 0.0);
        assert!(matches!(
            make_translation_loss(&shifted),
            Err(Error::Domain(_))
        ));
        let negative = TranslationProfile::new("t", |t| t, |_| 1.0, |_| 0.0, |_| 0.0);
        assert!(matches!(
            make_translation_loss(&negative),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn prior_ratio_losses() {
        let one: ScalarFn = Arc::new(|_| 1.0);
        let id: ScalarFn = Arc::new(|s| s);
        let plain = prior_ratio_to_loss(one.clone(), one.clone(), id.clone());
        assert_eq!(plain.value(0.3, 1.3), 1.0);

        let w: ScalarFn = Arc::new(|s| if (0.0..0.5).contains(&s) { 2.0 } else { 0.0 });
        let w0: ScalarFn = Arc::new(|s| if (0.0..=1.0).contains(&s) { 1.0 } else { 0.0 });
        let l = prior_ratio_to_loss(w, w0, id);
        assert!((l.value(0.25, 1.0) - 2.0 * 0.75 * 0.75).abs() < 1e-15);
        assert_eq!(l.value(0.75, 1.0), 0.0);
        assert!(matches!(l.try_value(1.5, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn finite_differences_match_closed_forms() {
        let l = Loss::new("cubic", |s, d| s * s * d + d * d * d);
        let (s, d) = (0.7, -1.3);
        assert!((l.partial(Partial::D01, s, d) - (s * s + 3.0 * d * d)).abs() < 1e-8);
        assert!((l.partial(Partial::D10, s, d) - 2.0 * s * d).abs() < 1e-8);
        assert!((l.partial(Partial::D02, s, d) - 6.0 * d).abs() < 1e-5);
        assert!((l.partial(Partial::D11, s, d) - 2.0 * s).abs() < 1e-5);
        assert!((l.partial(Partial::D20, s, d) - 2.0 * d).abs() < 1e-5);
    }

    #[test]
    fn scaled_and_blended_losses() {
        let class = make_asymmetric_quadratic(1.0, 2.0).unwrap();
        let s3 = class.upper().scaled(3.0);
        assert_eq!(s3.value(0.0, 1.0), 3.0);
        assert_eq!(s3.partial(Partial::D01, 0.0, 1.0), 6.0);
        assert!(s3.has_kinks());
        let mid = Loss::convex_blend(class.upper(), class.lower(), 0.5);
        assert_eq!(mid.value(0.0, 1.0), 0.75);
        assert_eq!(mid.partial(Partial::D01, 0.0, 1.0), 1.5);
        assert!(mid.near_kink(0.0, 0.0, 1e-6));
    }
}
