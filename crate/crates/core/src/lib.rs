//! Exact statistics for clusters of consecutive numbers in pattern-avoiding
//! permutations.
//!
//! A *cluster* of length `k` in a permutation `σ` is a window of `k`
//! consecutive positions whose values form a set of `k` consecutive
//! integers. This crate counts, enumerates and samples such clusters over
//! avoidance classes, evaluates the closed-form expectations for classes
//! avoiding one pattern of length three or a set of simple patterns, and
//! checks the generating-function identities behind them in exact rational
//! arithmetic.
//!
//! Module map:
//!
//! * [`perm`]: permutations, symmetries, reduction, pattern containment,
//!   blocks and the cluster contraction/extension maps.
//! * [`cluster`]: cluster occurrences and brute-force exact moments.
//! * [`enumerate`]: Catalan numbers, class generation and counting.
//! * [`formulas`]: closed-form expectations and asymptotic constants.
//! * [`series`]: truncated power series over the rationals.
//! * [`sampler`]: exact uniform samplers and a Monte-Carlo harness.

pub mod cluster;
pub mod enumerate;
pub mod error;
pub mod formulas;
pub mod perm;
pub mod rational;
pub mod sampler;
pub mod series;

pub use error::{Error, Result};
pub use perm::{AvoidanceClass, Interval, Permutation, Word};

/// Default upper bound on the number of class members a brute-force
/// computation may visit.
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;
