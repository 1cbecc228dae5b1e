//! Closed forms for the asymmetric squared-error class under a normal
//! posterior `N(mu, 1/lambda)`.
//!
//! Writing `d = mu + z / sqrt(lambda)`, the expected envelope loss is
//! `G(z) / lambda` for a function `G` free of `lambda`, so every measure
//! scales exactly: the diameter like `lambda^(-1/2)`, the regret and range
//! like `1/lambda`. The constants below use only the normal distribution
//! function and bisection, independently of the generic quadrature path.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{bail, Result};
use crate::minimize::bisect;
use crate::special::{normal_cdf, normal_pdf};

/// Standardized expected loss with weight `k_over` when `d >= sigma` and
/// `k_under` otherwise, for `sigma ~ N(0, 1)` and decision `z`.
pub fn standardized_loss(k_over: f64, k_under: f64, z: f64) -> f64 {
    let (cdf, pdf) = (normal_cdf(z), normal_pdf(z));
    0.5 * (k_over * ((z * z + 1.0) * cdf + z * pdf)
        + k_under * ((z * z + 1.0) * (1.0 - cdf) - z * pdf))
}

/// Derivative of [`standardized_loss`] in `z`.
pub fn standardized_slope(k_over: f64, k_under: f64, z: f64) -> f64 {
    let (cdf, pdf) = (normal_cdf(z), normal_pdf(z));
    k_over * (z * cdf + pdf) + k_under * (z * (1.0 - cdf) - pdf)
}

/// The constants of the class with weights `k1 < k2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymmetricQuadraticConstants {
    pub k1: f64,
    pub k2: f64,
    /// Standardized Bayes action of the upper envelope (weight `k2` on
    /// overestimation); negative.
    pub r1: f64,
    /// Standardized Bayes action of the lower envelope; positive.
    pub r2: f64,
    /// `lambda` times the regret of the posterior mean under the upper envelope.
    pub c1: f64,
    /// Same for the lower envelope.
    pub c2: f64,
}

impl AsymmetricQuadraticConstants {
    pub fn new(k1: f64, k2: f64) -> Result<Self> {
        if !(k1 > 0.0 && k1 < k2 && k2.is_finite()) {
            bail!(Domain, "constants need 0 < k1 < k2, got ({k1}, {k2})");
        }
        let root = |a: f64, b: f64| bisect(|z| standardized_slope(a, b, z), -10.0, 10.0, 1e-12);
        let (Some(r1), Some(r2)) = (root(k2, k1), root(k1, k2)) else {
            bail!(
                Numerical,
                "no standardized root on [-10, 10] for ({k1}, {k2})"
            );
        };
        let c1 = standardized_loss(k2, k1, 0.0) - standardized_loss(k2, k1, r1);
        let c2 = standardized_loss(k1, k2, 0.0) - standardized_loss(k1, k2, r2);
        Ok(Self {
            k1,
            k2,
            r1,
            r2,
            c1,
            c2,
        })
    }

    /// Diameter of the action set at posterior precision `lambda`.
    pub fn diameter(&self, lambda: f64) -> f64 {
        (self.r2 - self.r1) / lambda.sqrt()
    }

    /// Supremum regret of the posterior mean.
    pub fn sup_regret(&self, lambda: f64) -> f64 {
        self.c1.max(self.c2) / lambda
    }

    /// Range of the expected loss over the band `[k1 l0, k2 l0]` at the mean.
    pub fn range(&self, lambda: f64) -> f64 {
        0.5 * (self.k2 - self.k1) / lambda
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_are_symmetric_and_straddle_zero() {
        let c = AsymmetricQuadraticConstants::new(1.0, 2.0).unwrap();
        assert!(c.r1 < 0.0 && c.r2 > 0.0);
        assert!((c.r1 + c.r2).abs() < 1e-11);
        assert!((c.c1 - c.c2).abs() < 1e-12 && c.c1 > 0.0);
        assert!(standardized_slope(2.0, 1.0, c.r1).abs() < 1e-11);
    }

    #[test]
    fn standardized_loss_matches_symmetric_case() {
        // Equal weights: 0.5 k (z^2 + 1).
        for &z in &[-1.5, 0.0, 0.3, 2.0] {
            assert!((standardized_loss(3.0, 3.0, z) - 1.5 * (z * z + 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn slope_matches_difference_quotient() {
        let h = 1e-6;
        for &z in &[-1.0, 0.2, 1.7] {
            let fd = (standardized_loss(2.0, 1.0, z + h) - standardized_loss(2.0, 1.0, z - h))
                / (2.0 * h);
            assert!((fd - standardized_slope(2.0, 1.0, z)).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_unordered_weights() {
        assert!(AsymmetricQuadraticConstants::new(1.0, 1.0).is_err());
    }
}
