//! Network revenue management under stage-dependent Markov demand.
//!
//! A stage's demand is the number of periods it lasts; the previous stage's
//! demand drives the next stage's law. This crate derives the stage
//! probabilities, builds fluid upper-bound LPs, computes exact oracles on
//! small instances and simulates LP-derived admission policies.

pub mod demand;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod fluid;
pub mod instance;
pub mod policy;
pub mod rng;

pub use error::{Error, Result};
