//! Morphological compositional-generalization test suites for
//! agglutinative languages, with prompt rendering, model evaluation and
//! scoring.

pub mod derivation;
pub mod error;
pub mod eval_client;
pub mod io;
pub mod lang_profile;
pub mod metrics;
pub mod nonce;
pub mod num;
pub mod prompting;
pub mod report;
pub mod seed;
pub mod suite;

pub use error::{Error, Result};

pub const TOOL_NAME: &str = "morphcomp";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Floating-point score type used by the CLI and reports.
pub type Score = f64;
/// Exact score type for reproducible comparisons.
pub type ExactScore = num_rational::Ratio<i64>;
