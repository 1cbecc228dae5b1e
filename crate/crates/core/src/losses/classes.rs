use alloc::format;
use alloc::vec::Vec;

use super::{prior_ratio_to_loss, Loss, Partial, ScalarFn};
use crate::error::{bail, Result};

/// Points per axis of the audit grid.
pub const AUDIT_POINTS: usize = 100;

/// Rectangle `sigma x d` over which class orderings are audited. Its `d` range
/// also serves as the compact decision set of the diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditBox {
    pub sigma: (f64, f64),
    pub d: (f64, f64),
}

impl AuditBox {
    pub fn new(sigma: (f64, f64), d: (f64, f64)) -> Self {
        Self { sigma, d }
    }

    /// `[theta - 3, theta + 3] x k`.
    pub fn around(theta: f64, k: (f64, f64)) -> Self {
        Self {
            sigma: (theta - 3.0, theta + 3.0),
            d: k,
        }
    }

    /// Uniform `n x n` grid including the corners.
    pub fn grid(&self, n: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        let step =
            move |(lo, hi): (f64, f64), i: usize| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64;
        (0..n).flat_map(move |i| (0..n).map(move |j| (step(self.sigma, i), step(self.d, j))))
    }
}

fn slack(a: f64, b: f64) -> f64 {
    1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Losses whose decision derivative is pinched between those of `lower` and
/// `upper`: `D01 L <= D01 l <= D01 U`. The Bayes actions of the class fill the
/// interval between those of `U` and `L`.
#[derive(Debug, Clone)]
pub struct EnvelopeClass {
    upper: Loss,
    lower: Loss,
    reference: Loss,
    audit: AuditBox,
    band: Option<BandClass>,
}

impl EnvelopeClass {
    /// Checks `D01 L <= D01 l0 <= D01 U` on the audit grid, skipping points
    /// outside the losses' domain and points on a registered kink.
    pub fn new(upper: Loss, lower: Loss, reference: Loss, audit: AuditBox) -> Result<Self> {
        for (s, d) in audit.grid(AUDIT_POINTS) {
            if [&upper, &lower, &reference]
                .iter()
                .any(|l| l.check(s, d).is_err() || l.near_kink(s, d, 1e-12))
            {
                continue;
            }
            let (du, dl, d0) = (
                upper.partial(Partial::D01, s, d),
                lower.partial(Partial::D01, s, d),
                reference.partial(Partial::D01, s, d),
            );
            if dl > d0 + slack(dl, d0) || d0 > du + slack(d0, du) {
                bail!(
                    Domain,
                    "envelope ordering D01 L <= D01 l0 <= D01 U fails at (sigma, d) = ({s}, {d}): {dl}, {d0}, {du}"
                );
            }
        }
        Ok(Self {
            upper,
            lower,
            reference,
            audit,
            band: None,
        })
    }

    /// Attaches a band `[I, S]` that the class also lives in.
    pub fn with_band(mut self, band: BandClass) -> Self {
        self.band = Some(band);
        self
    }

    pub fn upper(&self) -> &Loss {
        &self.upper
    }

    pub fn lower(&self) -> &Loss {
        &self.lower
    }

    pub fn reference(&self) -> &Loss {
        &self.reference
    }

    pub fn audit(&self) -> AuditBox {
        self.audit
    }

    pub fn band(&self) -> Option<&BandClass> {
        self.band.as_ref()
    }

    /// The member `t U + (1 - t) L`.
    pub fn blend(&self, t: f64) -> Loss {
        Loss::convex_blend(&self.upper, &self.lower, t)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            upper: self.upper.scaled(c),
            lower: self.lower.scaled(c),
            reference: self.reference.scaled(c),
            audit: self.audit,
            band: self.band.as_ref().map(|b| b.scaled(c)),
        }
    }
}

/// All losses `l` with `I <= l <= S` pointwise.
#[derive(Debug, Clone)]
pub struct BandClass {
    lower: Loss,
    upper: Loss,
    reference: Loss,
    audit: AuditBox,
}

impl BandClass {
    pub fn new(lower: Loss, upper: Loss, reference: Loss, audit: AuditBox) -> Result<Self> {
        for (s, d) in audit.grid(AUDIT_POINTS) {
            if [&upper, &lower, &reference]
                .iter()
                .any(|l| l.check(s, d).is_err())
            {
                continue;
            }
            let (i, l0, u) = (lower.value(s, d), reference.value(s, d), upper.value(s, d));
            if i > l0 + slack(i, l0) || l0 > u + slack(l0, u) {
                bail!(
                    BandViolation,
                    "band ordering I <= l0 <= S fails at (sigma, d) = ({s}, {d}): {i}, {l0}, {u}"
                );
            }
        }
        Ok(Self {
            lower,
            upper,
            reference,
            audit,
        })
    }

    /// The lower edge `I`.
    pub fn lower(&self) -> &Loss {
        &self.lower
    }

    /// The upper edge `S`.
    pub fn upper(&self) -> &Loss {
        &self.upper
    }

    pub fn reference(&self) -> &Loss {
        &self.reference
    }

    pub fn audit(&self) -> AuditBox {
        self.audit
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            lower: self.lower.scaled(c),
            upper: self.upper.scaled(c),
            reference: self.reference.scaled(c),
            audit: self.audit,
        }
    }
}

/// An explicit nonempty list of losses.
#[derive(Debug, Clone)]
pub struct FiniteClass {
    losses: Vec<Loss>,
    audit: Option<AuditBox>,
}

impl FiniteClass {
    pub fn new(losses: Vec<Loss>) -> Result<Self> {
        if losses.is_empty() {
            bail!(Domain, "a finite loss class needs at least one loss");
        }
        Ok(Self {
            losses,
            audit: None,
        })
    }

    pub fn with_audit(mut self, audit: AuditBox) -> Self {
        self.audit = Some(audit);
        self
    }

    pub fn losses(&self) -> &[Loss] {
        &self.losses
    }

    pub fn audit(&self) -> Option<AuditBox> {
        self.audit
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            losses: self.losses.iter().map(|l| l.scaled(c)).collect(),
            audit: self.audit,
        }
    }
}

/// Losses `(d - a(sigma))^2 w(sigma) / w0(sigma)` for priors `w` in a list,
/// optionally alongside a density band `w_lo <= w <= w_hi`.
#[derive(Clone)]
pub struct PriorRatioClass {
    a: ScalarFn,
    base: ScalarFn,
    priors: Vec<ScalarFn>,
    band: Option<(ScalarFn, ScalarFn)>,
    audit: AuditBox,
}

impl core::fmt::Debug for PriorRatioClass {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("PriorRatioClass")
            .field("priors", &self.priors.len())
            .field("band", &self.band.is_some())
            .field("audit", &self.audit)
            .finish()
    }
}

impl PriorRatioClass {
    /// Fails when `w0` is not positive at some `sigma` of the audit grid.
    pub fn new(
        a: ScalarFn,
        base: ScalarFn,
        priors: Vec<ScalarFn>,
        audit: AuditBox,
    ) -> Result<Self> {
        if priors.is_empty() {
            bail!(
                Domain,
                "a prior-ratio class needs at least one prior density"
            );
        }
        for i in 0..AUDIT_POINTS {
            let s = audit.sigma.0
                + (audit.sigma.1 - audit.sigma.0) * i as f64 / (AUDIT_POINTS - 1) as f64;
            let w0 = base(s);
            if !(w0 > 0.0) {
                bail!(
                    Domain,
                    "base prior density is not positive at sigma = {s} (w0 = {w0})"
                );
            }
        }
        Ok(Self {
            a,
            base,
            priors,
            band: None,
            audit,
        })
    }

    pub fn with_band(mut self, w_lo: ScalarFn, w_hi: ScalarFn) -> Self {
        self.band = Some((w_lo, w_hi));
        self
    }

    pub fn losses(&self) -> Vec<Loss> {
        self.priors
            .iter()
            .enumerate()
            .map(|(i, w)| {
                prior_ratio_to_loss(w.clone(), self.base.clone(), self.a.clone())
                    .relabel(format!("prior-{i}"))
            })
            .collect()
    }

    pub fn to_finite(&self) -> FiniteClass {
        FiniteClass {
            losses: self.losses(),
            audit: Some(self.audit),
        }
    }

    /// The band `[I, S]` induced by the density band, with the base prior's
    /// loss as reference.
    pub fn to_band(&self) -> Result<BandClass> {
        let Some((lo, hi)) = &self.band else {
            bail!(Unsupported, "prior-ratio class has no density band");
        };
        let make = |w: &ScalarFn| prior_ratio_to_loss(w.clone(), self.base.clone(), self.a.clone());
        BandClass::new(
            make(lo).relabel("I"),
            make(hi).relabel("S"),
            make(&self.base).relabel("l0"),
            self.audit,
        )
    }

    pub fn audit(&self) -> AuditBox {
        self.audit
    }
}

/// The supported loss classes.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum LossClass {
    Envelope(EnvelopeClass),
    Band(BandClass),
    Finite(FiniteClass),
    PriorRatio(PriorRatioClass),
}

impl LossClass {
    /// The losses that stand for the class in per-loss computations: the
    /// envelopes and reference, the band edges and reference, or every member.
    pub fn representatives(&self) -> Vec<Loss> {
        match self {
            LossClass::Envelope(e) => {
                alloc::vec![e.upper.clone(), e.lower.clone(), e.reference.clone()]
            }
            LossClass::Band(b) => {
                alloc::vec![b.lower.clone(), b.upper.clone(), b.reference.clone()]
            }
            LossClass::Finite(f) => f.losses.clone(),
            LossClass::PriorRatio(p) => p.losses(),
        }
    }

    pub fn audit(&self) -> Option<AuditBox> {
        match self {
            LossClass::Envelope(e) => Some(e.audit),
            LossClass::Band(b) => Some(b.audit),
            LossClass::Finite(f) => f.audit,
            LossClass::PriorRatio(p) => Some(p.audit),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LossClass::Envelope(_) => "envelope",
            LossClass::Band(_) => "band",
            LossClass::Finite(_) => "finite",
            LossClass::PriorRatio(_) => "prior-ratio",
        }
    }

    /// Every loss multiplied by `c`. Prior-ratio classes become finite.
    pub fn scaled(&self, c: f64) -> LossClass {
        match self {
            LossClass::Envelope(e) => LossClass::Envelope(e.scaled(c)),
            LossClass::Band(b) => LossClass::Band(b.scaled(c)),
            LossClass::Finite(f) => LossClass::Finite(f.scaled(c)),
            LossClass::PriorRatio(p) => LossClass::Finite(p.to_finite().scaled(c)),
        }
    }
}

impl From<EnvelopeClass> for LossClass {
    fn from(c: EnvelopeClass) -> Self {
        LossClass::Envelope(c)
    }
}

impl From<BandClass> for LossClass {
    fn from(c: BandClass) -> Self {
        LossClass::Band(c)
    }
}

impl From<FiniteClass> for LossClass {
    fn from(c: FiniteClass) -> Self {
        LossClass::Finite(c)
    }
}

impl From<PriorRatioClass> for LossClass {
    fn from(c: PriorRatioClass) -> Self {
        LossClass::PriorRatio(c)
    }
}
