//! Composite Simpson quadrature with interval halving.
//!
//! The rule is built from successive trapezoid sums, so each halving only
//! evaluates the new midpoints. Refinement stops once two consecutive Simpson
//! estimates differ by less than `rel_tol` relative to the L1 mass of the
//! integrand, which keeps integrals of sign-changing functions (odd central
//! moments, say) from chasing a relative target around zero.

use alloc::vec::Vec;

use crate::error::{bail, Result};

/// Stopping rule for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpsonRule {
    pub rel_tol: f64,
    /// Panel count at which refinement gives up.
    pub max_panels: usize,
    pub min_panels: usize,
}

impl Default for SimpsonRule {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            max_panels: 1 << 20,
            min_panels: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Estimate of the integral of `|f|`.
    pub l1: f64,
    pub panels: usize,
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rule: &SimpsonRule) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        bail!(Numerical, "non-finite integration limits [{a}, {b}]");
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            l1: 0.0,
            panels: 0,
        });
    }
    if a > b {
        let r = integrate(f, b, a, rule)?;
        return Ok(Integral {
            value: -r.value,
            ..r
        });
    }

    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if !y.is_finite() {
            bail!(Numerical, "integrand is not finite at {x} (value {y})");
        }
        Ok(y)
    };

    let mut n = 2usize;
    let mut h = (b - a) / n as f64;
    let (fa, fb) = (eval(a)?, eval(b)?);
    let fm = eval(a + h)?;
    let mut trap = h * (0.5 * (fa + fb) + fm);
    let mut trap_abs = h * (0.5 * (fa.abs() + fb.abs()) + fm.abs());
    let mut prev: Option<f64> = None;

    loop {
        // Halve: the new nodes are the midpoints of the current panels.
        let mut mid = 0.0;
        let mut mid_abs = 0.0;
        for i in 0..n {
            let y = eval(a + (i as f64 + 0.5) * h)?;
            mid += y;
            mid_abs += y.abs();
        }
        let next_trap = 0.5 * trap + 0.5 * h * mid;
        let next_abs = 0.5 * trap_abs + 0.5 * h * mid_abs;
        let simpson = (4.0 * next_trap - trap) / 3.0;
        let simpson_abs = (4.0 * next_abs - trap_abs) / 3.0;
        n *= 2;
        h *= 0.5;
        trap = next_trap;
        trap_abs = next_abs;

        if let Some(p) = prev {
            let scale = simpson_abs.abs().max(simpson.abs());
            if n >= rule.min_panels && (simpson - p).abs() <= rule.rel_tol * scale {
                return Ok(Integral {
                    value: simpson,
                    l1: simpson_abs,
                    panels: n,
                });
            }
            if scale == 0.0 && n >= rule.min_panels {
                return Ok(Integral {
                    value: 0.0,
                    l1: 0.0,
                    panels: n,
                });
            }
        }
        if n >= rule.max_panels {
            bail!(
                Numerical,
                "quadrature on [{a}, {b}] did not converge with {n} panels (last estimates {:?} and {simpson})",
                prev
            );
        }
        prev = Some(simpson);
    }
}

/// Integrates over `[a, b]`, splitting the interval at every break point that
/// falls strictly inside it. Break points mark kinks or jumps of `f`.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    rule: &SimpsonRule,
) -> Result<Integral> {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();
    let mut total = Integral {
        value: 0.0,
        l1: 0.0,
        panels: 0,
    };
    let mut left = a;
    for right in cuts.into_iter().chain(core::iter::once(b)) {
        let piece = integrate(&f, left, right, rule)?;
        total.value += piece.value;
        total.l1 += piece.l1;
        total.panels += piece.panels;
        left = right;
    }
    Ok(total)
}
