//! Simulation lab for non-sparse, high-dimensional linear contextual bandits.
//!
//! Each arm's reward is linear in a `p`-dimensional context whose covariance
//! has a slowly decaying spectrum. Arms are learned with the minimum-norm
//! interpolating least-squares estimator, and exploration length is chosen
//! either from known spectral quantities (explore-then-commit) or online from
//! estimated ones (adaptive explore-then-commit).
//!
//! Modules:
//! - [`spectrum`]: effective/coherent ranks, effective bias and variance,
//!   error functions, optimal exploration, and their empirical estimators.
//! - [`interpolate`]: the minimum-norm interpolator and excess risk.
//! - [`envs`]: covariance generators, bandit environments, reward draws.
//! - [`policies`]: EtC, AEtC, LinUCB, ESTC (Lasso), uniform and oracle.
//! - [`harness`]: seeded episodes, regret accounting, experiments, CSV output.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod envs;
pub mod error;
pub mod harness;
pub mod interpolate;
pub mod par;
pub mod policies;
pub mod rng;
pub mod spectrum;

pub use error::{Error, Result};
