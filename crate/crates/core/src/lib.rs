//! Exact population-level analysis of bias amplification by instrumental
//! variables ("Z-bias").
//!
//! Given a fully specified discrete data-generating process over an
//! instrument `Z`, an unmeasured confounder `U`, a binary treatment `A` and
//! an outcome `Y`, this crate computes the true causal effects together with
//! the unadjusted and `Z`-adjusted estimators, checks the monotonicity and
//! no-interaction conditions under which adjustment provably amplifies bias,
//! and estimates by Monte Carlo how much of the binary parameter space
//! exhibits amplification.
//!
//! Everything is computed by exact enumeration over finite supports; the
//! only randomness lives in [`montecarlo`].

// Cell enumerations read best as indexed loops.
#![allow(clippy::needless_range_loop)]

pub mod conditions;
pub mod error;
pub mod estimators;
pub mod json;
pub mod montecarlo;
mod numeric;
pub mod scenario;

pub use conditions::{ConditionBundle, ConditionReport, Witness, ZBiasVerdict};
pub use error::{Error, ErrorClass, Result};
pub use estimators::{Conditioning, DceSet, EstimateSet, RrSet};
pub use montecarlo::{McConfig, McFilter, McResult, ScatterError};
pub use scenario::{
    parse_scenario, BinaryScenario, CovariateFamily, DiscreteParts, DiscreteScenario, OutcomePair,
    PotentialOutcomeScenario, Scenario, Stratum,
};

/// Absolute tolerance for algebraic identities between two computation routes.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Absolute tolerance used when validating scenario invariants (sums to one, etc.).
pub const VALIDATION_TOL: f64 = 1e-9;
/// Default tolerance for merging instrument levels with equal propensity.
pub const MERGE_TOL: f64 = 1e-9;
/// Residual threshold under which a fitted treatment model is taken to hold.
pub const MODEL_FIT_TOL: f64 = 1e-9;
/// Slack allowed in weak monotonicity and ordering comparisons.
pub const ORDER_TOL: f64 = 1e-12;
