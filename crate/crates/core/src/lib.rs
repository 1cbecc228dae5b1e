//! Global robustness of Bayes decisions over classes of loss functions.
//!
//! The crate computes, for a posterior over a scalar parameter and a class of
//! losses, the three usual robustness measures:
//!
//! * the set of Bayes actions (reported through its diameter),
//! * the supremum posterior regret of a reference decision,
//! * the range of the posterior expected loss at a reference decision,
//!
//! together with the limit quantities governing their large-sample behaviour
//! (`phi`, regret coefficients, `N_S`/`N_I`, `L_f`) and a seeded simulation
//! harness that estimates the empirical rates at which the measures settle.
//!
//! Everything here is pure computation over immutable inputs, so the crate is
//! `no_std` with `alloc`. File formats, configuration and the command line live
//! in the companion `robust-bayes` crate.

#![no_std]
// Float math comes from the libm-backed `num_traits::Float`. Whenever std is
// linked into the build its inherent methods take precedence, which is why
// those imports carry `allow(unused_imports)`.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod decision;
pub mod error;
pub mod losses;
pub mod minimize;
pub mod posteriors;
pub mod quadrature;
pub mod ratelab;
pub mod robustness;
pub mod special;

pub use decision::{action_set, bayes_action, diameter, expected_loss, ActionSet, Interval};
pub use error::{Error, Result};
pub use losses::{
    BandClass, EnvelopeClass, FiniteClass, Loss, LossClass, Partial, PriorRatioClass,
};
pub use posteriors::{
    gamma_update, normal_update, GammaPosterior, GridPosterior, NormalPosterior, Posterior,
};
pub use robustness::{range_band, regret, sup_regret, LimitQuantities, RobustnessReport};
