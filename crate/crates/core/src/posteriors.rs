//! Posterior distributions over a scalar parameter.
//!
//! Two conjugate families are available in closed form (normal mean with known
//! precision, exponential rate under the `1/sigma` reference prior) and any
//! other model can be represented on a grid. All three integrate arbitrary
//! functions through [`Posterior::expectation`].

#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::quadrature::{integrate_with_breaks, SimpsonRule};
use crate::special::{gamma_p, gamma_q, gamma_quantile, normal_cdf};

/// Below this posterior standard deviation expectations collapse to a point
/// evaluation at the mode.
pub const POINT_MASS_SD: f64 = 1e-13;

/// Half-width of the normal integration window, in posterior standard deviations.
const NORMAL_WINDOW_SDS: f64 = 10.0;

/// Tail mass left out of the gamma integration window on each side.
const GAMMA_WINDOW_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalPosterior {
    mean: f64,
    precision: f64,
}

impl NormalPosterior {
    pub fn new(mean: f64, precision: f64) -> Result<Self> {
        if !(precision > 0.0 && precision.is_finite()) {
            bail!(Domain, "normal precision must be positive, got {precision}");
        }
        if !mean.is_finite() {
            bail!(Domain, "normal mean must be finite, got {mean}");
        }
        Ok(Self { mean, precision })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn precision(&self) -> f64 {
        self.precision
    }

    pub fn sd(&self) -> f64 {
        1.0 / self.precision.sqrt()
    }

    /// Conjugate update with observations of known precision.
    pub fn update(&self, obs_precision: f64, data: &[f64]) -> Result<Self> {
        if !(obs_precision > 0.0 && obs_precision.is_finite()) {
            bail!(
                Domain,
                "observation precision must be positive, got {obs_precision}"
            );
        }
        if data.is_empty() {
            return Ok(*self);
        }
        let sum: f64 = data.iter().sum();
        let precision = self.precision + data.len() as f64 * obs_precision;
        let mean = (self.precision * self.mean + obs_precision * sum) / precision;
        Self::new(mean, precision)
    }
}

/// Posterior `N(mu_n, 1/lambda_n)` for a normal mean with known observation
/// precision `obs_precision` and prior `N(mu0, 1/lambda0)`.
pub fn normal_update(
    mu0: f64,
    lambda0: f64,
    obs_precision: f64,
    data: &[f64],
) -> Result<NormalPosterior> {
    NormalPosterior::new(mu0, lambda0)?.update(obs_precision, data)
}

/// Gamma law with the shape/rate parametrization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPosterior {
    shape: f64,
    rate: f64,
}

impl GammaPosterior {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite() && rate > 0.0 && rate.is_finite()) {
            bail!(
                Domain,
                "gamma shape and rate must be positive, got ({shape}, {rate})"
            );
        }
        Ok(Self { shape, rate })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn variance(&self) -> f64 {
        self.shape / (self.rate * self.rate)
    }

    pub fn mode(&self) -> f64 {
        ((self.shape - 1.0) / self.rate).max(0.0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        gamma_p(self.shape, x * self.rate)
    }

    fn survival(&self, x: f64) -> f64 {
        gamma_q(self.shape, x * self.rate)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        gamma_quantile(self.shape, self.rate, p)
    }
}

/// Posterior `Gamma(n, sum x_i)` for the rate of exponential observations under
/// the reference prior `1/sigma`.
pub fn gamma_update(data: &[f64]) -> Result<GammaPosterior> {
    if data.is_empty() {
        bail!(Domain, "gamma update needs at least one observation");
    }
    if let Some(bad) = data.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        bail!(
            Domain,
            "exponential observations must be positive, got {bad}"
        );
    }
    GammaPosterior::new(data.len() as f64, data.iter().sum())
}

/// Posterior represented by normalized masses on an ordered grid.
///
/// The masses already include the Simpson weights of the grid, so an
/// expectation is a plain weighted sum.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPosterior {
    nodes: Vec<f64>,
    log_weights: Vec<f64>,
    weights: Vec<f64>,
}

impl GridPosterior {
    /// Builds a grid posterior from unnormalized log masses.
    pub fn from_log_masses(nodes: Vec<f64>, log_masses: Vec<f64>) -> Result<Self> {
        if nodes.len() != log_masses.len() || nodes.len() < 2 {
            bail!(Domain, "grid needs at least two nodes with matching masses");
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            bail!(Domain, "grid nodes must be strictly increasing");
        }
        let max = log_masses
            .iter()
            .copied()
            .filter(|x| !x.is_nan())
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            bail!(
                DegeneratePosterior,
                "likelihood vanishes over the whole support"
            );
        }
        // Max-shift before exponentiating so that n ~ 1e4 observations do not underflow.
        let shifted: Vec<f64> = log_masses
            .iter()
            .map(|&l| {
                if l.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    l - max
                }
            })
            .collect();
        let total: f64 = shifted.iter().map(|l| l.exp()).sum();
        let log_total = total.ln();
        let log_weights: Vec<f64> = shifted.iter().map(|l| l - log_total).collect();
        let weights = log_weights.iter().map(|l| l.exp()).collect();
        Ok(Self {
            nodes,
            log_weights,
            weights,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The same posterior translated by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            nodes: self.nodes.iter().map(|x| x + c).collect(),
            log_weights: self.log_weights.clone(),
            weights: self.weights.clone(),
        }
    }

    fn sum<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| if w > 0.0 { w * g(x) } else { 0.0 })
            .sum()
    }
}

/// Builds a grid posterior on `support` from a prior log density and a
/// per-observation log likelihood. `resolution` is the number of panels; it is
/// rounded up to an even count for Simpson weights.
pub fn grid_posterior<P, L, T>(
    prior_log_density: P,
    log_likelihood: L,
    data: &[T],
    support: (f64, f64),
    resolution: usize,
) -> Result<GridPosterior>
where
    P: Fn(f64) -> f64,
    L: Fn(f64, &T) -> f64,
{
    let (lo, hi) = support;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        bail!(
            Domain,
            "grid support must be a finite interval, got [{lo}, {hi}]"
        );
    }
    if resolution < 16 {
        bail!(
            Domain,
            "grid resolution must be at least 16, got {resolution}"
        );
    }
    let panels = resolution + resolution % 2;
    let h = (hi - lo) / panels as f64;
    let mut nodes = Vec::with_capacity(panels + 1);
    let mut log_masses = Vec::with_capacity(panels + 1);
    for i in 0..=panels {
        let x = if i == panels { hi } else { lo + i as f64 * h };
        let simpson = if i == 0 || i == panels {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let loglik: f64 = data.iter().map(|obs| log_likelihood(x, obs)).sum();
        nodes.push(x);
        log_masses.push(prior_log_density(x) + loglik + f64::ln(simpson));
    }
    GridPosterior::from_log_masses(nodes, log_masses)
}

/// A posterior over the scalar parameter `sigma`.
#[derive(Debug, Clone, PartialEq)]
pub enum Posterior {
    Normal(NormalPosterior),
    Gamma(GammaPosterior),
    Grid(GridPosterior),
}

impl From<NormalPosterior> for Posterior {
    fn from(p: NormalPosterior) -> Self {
        Posterior::Normal(p)
    }
}

impl From<GammaPosterior> for Posterior {
    fn from(p: GammaPosterior) -> Self {
        Posterior::Gamma(p)
    }
}

impl From<GridPosterior> for Posterior {
    fn from(p: GridPosterior) -> Self {
        Posterior::Grid(p)
    }
}

impl Posterior {
    pub fn mean(&self) -> f64 {
        match self {
            Posterior::Normal(p) => p.mean(),
            Posterior::Gamma(p) => p.mean(),
            Posterior::Grid(p) => p.sum(|x| x),
        }
    }

    pub fn sd(&self) -> f64 {
        match self {
            Posterior::Normal(p) => p.sd(),
            Posterior::Gamma(p) => p.variance().sqrt(),
            Posterior::Grid(p) => {
                let m = self.mean();
                p.sum(|x| (x - m) * (x - m)).max(0.0).sqrt()
            }
        }
    }

    pub fn mode(&self) -> f64 {
        match self {
            Posterior::Normal(p) => p.mean(),
            Posterior::Gamma(p) => p.mode(),
            Posterior::Grid(p) => {
                let i = p
                    .weights
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                p.nodes[i]
            }
        }
    }

    /// Infimum of the support, used for domain checks of losses.
    pub fn support_lower(&self) -> f64 {
        match self {
            Posterior::Normal(_) => f64::NEG_INFINITY,
            Posterior::Gamma(_) => 0.0,
            Posterior::Grid(p) => p.nodes[0],
        }
    }

    /// Interval on which the expectation quadrature runs. Grid posteriors
    /// report their node range.
    pub fn integration_window(&self) -> (f64, f64) {
        match self {
            Posterior::Normal(p) => {
                let half = NORMAL_WINDOW_SDS * p.sd();
                (p.mean - half, p.mean + half)
            }
            Posterior::Gamma(p) => (
                p.quantile(GAMMA_WINDOW_TAIL),
                p.quantile(1.0 - GAMMA_WINDOW_TAIL),
            ),
            Posterior::Grid(p) => (p.nodes[0], p.nodes[p.nodes.len() - 1]),
        }
    }

    /// Density of a conjugate posterior, with its normalizer computed once.
    fn density_fn(&self) -> impl Fn(f64) -> f64 {
        let (kind, a, b, c) = match self {
            Posterior::Normal(p) => (0u8, p.mean, p.precision.sqrt(), 0.0),
            Posterior::Gamma(p) => (
                1u8,
                p.shape,
                p.rate,
                p.shape * p.rate.ln() - crate::special::ln_gamma(p.shape),
            ),
            Posterior::Grid(_) => (2u8, 0.0, 0.0, 0.0),
        };
        move |x: f64| match kind {
            0 => crate::special::normal_pdf((x - a) * b) * b,
            1 if x > 0.0 => (c + (a - 1.0) * x.ln() - b * x).exp(),
            _ => 0.0,
        }
    }

    /// `E[g(sigma)]` under the posterior.
    pub fn expectation<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64> {
        self.expectation_with_breaks(g, &[])
    }

    /// `E[g(sigma)]` where `g` may be non-smooth at the given `breaks`; the
    /// quadrature is split there. Grid posteriors ignore the break points.
    pub fn expectation_with_breaks<G: Fn(f64) -> f64>(&self, g: G, breaks: &[f64]) -> Result<f64> {
        if let Posterior::Grid(p) = self {
            let value = p.sum(&g);
            if !value.is_finite() {
                bail!(Numerical, "grid expectation is not finite");
            }
            return Ok(value);
        }
        if self.sd() < POINT_MASS_SD {
            let m = self.mode();
            let value = g(m);
            if !value.is_finite() {
                bail!(
                    Numerical,
                    "integrand is not finite at the posterior mode {m}"
                );
            }
            return Ok(value);
        }
        let (a, b) = self.integration_window();
        let density = self.density_fn();
        let integral =
            integrate_with_breaks(|x| g(x) * density(x), a, b, breaks, &SimpsonRule::default())
                .map_err(|e| {
                    crate::Error::Numerical(format!("posterior expectation failed: {e}"))
                })?;
        Ok(integral.value)
    }

    /// Posterior probability of the interval `[lo, hi]`.
    pub fn probability(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        match self {
            Posterior::Normal(p) => {
                let s = p.precision.sqrt();
                let upper = normal_cdf((hi - p.mean) * s);
                let lower = normal_cdf((lo - p.mean) * s);
                (upper - lower).max(0.0)
            }
            Posterior::Gamma(p) => {
                let lo = lo.max(0.0);
                if hi <= 0.0 {
                    return 0.0;
                }
                // Take the difference on the tail that keeps precision.
                if lo > p.mean() {
                    (p.survival(lo) - p.survival(hi)).max(0.0)
                } else {
                    (p.cdf(hi) - p.cdf(lo)).max(0.0)
                }
            }
            Posterior::Grid(p) => p.sum(|x| if x >= lo && x <= hi { 1.0 } else { 0.0 }),
        }
    }

    /// Translates the posterior by `c`. Gamma posteriors have a fixed support
    /// and cannot be shifted.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        match self {
            Posterior::Normal(p) => Ok(Posterior::Normal(NormalPosterior::new(
                p.mean + c,
                p.precision,
            )?)),
            Posterior::Grid(p) => Ok(Posterior::Grid(p.shifted(c))),
            Posterior::Gamma(_) => bail!(
                Unsupported,
                "gamma posteriors are not closed under translation"
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn normal_update_examples() {
        let p = normal_update(0.0, 1.0, 1.0, &[1.0, 2.0, 3.0]).unwrap();
        assert!((p.mean() - 1.5).abs() < 1e-15 && (p.precision() - 4.0).abs() < 1e-15);
        let p = normal_update(5.0, 2.0, 1.0, &[]).unwrap();
        assert_eq!((p.mean(), p.precision()), (5.0, 2.0));
        let p = normal_update(0.0, 1.0, 4.0, &[1.0]).unwrap();
        assert!((p.mean() - 0.8).abs() < 1e-15 && (p.precision() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn normal_update_rejects_nonpositive_precision() {
        assert!(matches!(
            normal_update(0.0, 0.0, 1.0, &[1.0]),
            Err(crate::Error::Domain(_))
        ));
        assert!(matches!(
            normal_update(0.0, 1.0, -1.0, &[1.0]),
            Err(crate::Error::Domain(_))
        ));
    }

    #[test]
    fn gamma_update_examples() {
        let p = gamma_update(&[2.0]).unwrap();
        assert_eq!((p.shape(), p.rate()), (1.0, 2.0));
        assert!((p.mean() - 0.5).abs() < 1e-15);
        let p = gamma_update(&[1.0; 4]).unwrap();
        assert!((p.mean() - 1.0).abs() < 1e-15 && (p.variance() - 0.25).abs() < 1e-15);
        assert!(gamma_update(&[]).is_err());
        assert!(gamma_update(&[1.0, 0.0]).is_err());
        assert!(gamma_update(&[1.0, -2.0]).is_err());
    }

    #[test]
    fn expectation_examples() {
        let g: Posterior = GammaPosterior::new(100.0, 193.6).unwrap().into();
        let m = g.expectation(|s| s).unwrap();
        assert!((m - 100.0 / 193.6).abs() < 1e-9 * m);

        let n: Posterior = NormalPosterior::new(1.5, 4.0).unwrap().into();
        let v = n.expectation(|s| (s - 1.5) * (s - 1.5)).unwrap();
        assert!((v - 0.25).abs() < 1e-10);
    }

    #[test]
    fn gamma_inverse_moment_with_exponential_tilt() {
        // E[sigma^-1 exp(-4.5 sigma)] = r^n Gamma(n-1) / (Gamma(n) (r + 4.5)^(n-1)).
        let (n, r) = (100.0f64, 193.6f64);
        let closed = (n * r.ln() - (n - 1.0).ln() - (n - 1.0) * (r + 4.5).ln()).exp();
        let g: Posterior = GammaPosterior::new(n, r).unwrap().into();
        let q = g.expectation(|s| (-4.5 * s).exp() / s).unwrap();
        assert!((q - closed).abs() < 1e-9 * closed, "{q} vs {closed}");
    }

    #[test]
    fn normalization() {
        let posts: [Posterior; 3] = [
            NormalPosterior::new(-3.0, 1e4).unwrap().into(),
            GammaPosterior::new(1.0, 0.3).unwrap().into(),
            GammaPosterior::new(1e4, 2e4).unwrap().into(),
        ];
        for p in &posts {
            assert!((p.expectation(|_| 1.0).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn grid_rejects_bad_inputs() {
        let data: [f64; 0] = [];
        assert!(grid_posterior(|_| 0.0, |_, _: &f64| 0.0, &data, (0.0, 1.0), 8).is_err());
        assert!(grid_posterior(|_| 0.0, |_, _: &f64| 0.0, &data, (1.0, 0.0), 32).is_err());
        let err = grid_posterior(
            |_| 0.0,
            |_, _: &f64| f64::NEG_INFINITY,
            &[1.0],
            (0.0, 1.0),
            32,
        )
        .unwrap_err();
        assert!(matches!(err, crate::Error::DegeneratePosterior(_)));
    }

    #[test]
    fn flat_grid_has_midpoint_mean() {
        let data: [f64; 0] = [];
        let g = grid_posterior(|_| 0.0, |_, _: &f64| 0.0, &data, (2.0, 5.0), 64).unwrap();
        let p: Posterior = g.clone().into();
        assert!((p.mean() - 3.5).abs() < 1e-12);
        let total: f64 = g.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_survives_large_samples() {
        let data = vec![0.5; 10_000];
        let g = grid_posterior(
            |s: f64| -s.ln(),
            |s: f64, x: &f64| s.ln() - s * x,
            &data,
            (1.5, 2.5),
            4000,
        )
        .unwrap();
        let p: Posterior = g.into();
        let exact = 10_000.0 / 5_000.0;
        assert!((p.mean() - exact).abs() < 1e-6);
    }

    #[test]
    fn point_mass_fallback() {
        let p: Posterior = NormalPosterior::new(2.0, 1e30).unwrap().into();
        assert_eq!(p.expectation(|s| s * s).unwrap(), 4.0);
    }

    #[test]
    fn probabilities() {
        let p: Posterior = NormalPosterior::new(0.0, 1.0).unwrap().into();
        assert!(
            (p.probability(-1.959_963_984_540_054, 1.959_963_984_540_054) - 0.95).abs() < 1e-12
        );
        let g: Posterior = GammaPosterior::new(1.0, 1.0).unwrap().into();
        assert!((g.probability(1.0, 2.0) - ((-1.0f64).exp() - (-2.0f64).exp())).abs() < 1e-14);
    }
}
