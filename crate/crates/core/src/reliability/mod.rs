//! Limit-state functions and the non-probabilistic reliability index.

pub mod expr;
pub mod solver;

pub use expr::{BoundLimitState, LimitState};
pub use solver::{reliability_index, ReliabilityOptions, ReliabilityResult};
