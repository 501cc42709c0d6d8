//! Synthetic infant severity pipeline: deterministic cohort generation,
//! Bayesian ridge regression fitted by evidence maximization, an evaluation
//! harness, and quantile-based severity triage.
//!
//! Everything downstream of a seed is bit-reproducible: the same seed yields
//! the same cohort, the same train/test split, the same fitted model, and the
//! same report bytes, regardless of thread count.

pub mod cohort;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod ridge;
pub mod rng;
pub mod triage;

mod fsutil;

pub use error::{Error, Result};
