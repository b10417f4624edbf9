//! Numerical laboratory for posterior mass dynamics on discretized model
//! families: separation certificates with exponential decay bounds, entropy
//! and sieve conditions, formal posteriors from improper priors, and
//! diagnostics for independent non-identically-distributed regression.
//!
//! The primary interface is the `examples/` directory (one runnable example
//! per capability); a thin `consistency-lab` binary exposes scenario runs,
//! divergence queries, cover construction and the invariant checker.

pub mod cli;
pub mod densities;
pub mod entropy;
pub mod error;
pub mod experiments;
pub mod grammar;
pub mod logsum;
pub mod posterior;
pub mod priors;
pub mod quad;
pub mod regression;
pub mod rng;
pub mod separation;

pub use error::{Error, Result};
