//! Bayesian parameter estimation for deterministic models from qualitative
//! (categorical or ordinal) observations, quantitative measurements, or both.
//!
//! The pipeline is: constraint statements ([`constraint`]) are normalized into
//! one-sided observations whose likelihood ([`likelihood`]) is evaluated on
//! model trajectories ([`model`]); a parallel-tempering sampler ([`sampler`])
//! draws posterior samples that [`analysis`] summarizes. [`synthetic`]
//! produces ground-truth datasets for validation.

// `!(x > 0.0)` style checks reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod constraint;
pub mod data;
pub mod error;
pub mod likelihood;
pub mod model;
pub mod problem;
pub mod sampler;
pub mod synthetic;

pub use error::{Error, Result};
pub use problem::{Objective, Problem};
