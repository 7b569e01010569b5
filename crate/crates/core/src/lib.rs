//! Detection of malicious shortened URLs from shortener click analytics.
//!
//! The crate covers the full path from raw short-link corpora to verdicts:
//! blacklist- and probe-based labeling, a seven-feature extraction layer,
//! from-scratch Bayes/tree/forest classifiers with stratified evaluation,
//! and behavioural profiling of the accounts that create the links. A
//! deterministic synthetic-corpus generator with planted effects backs the
//! test suite; the `shortguard` binary exposes every stage as a subcommand.

pub mod corpus;
pub mod domain;
pub mod error;
pub mod eval;
pub mod features;
pub mod labeling;
pub mod learn;
pub mod num;
pub mod parallel;
pub mod pipeline;
pub mod profile;
pub mod rng;
pub mod timeutil;

pub use error::{Error, Result};

/// Default scalar for feature values, scores, and metrics. The numeric
/// kernels are generic over [`num::Real`]; this is the type the rest of the
/// crate instantiates them at.
pub type Scalar = f64;
