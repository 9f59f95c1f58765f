//! Exact finite-scale constructions in the rational Urysohn space.
//!
//! Everything is computed with exact rationals; no floating point is used.

pub mod error;
pub mod extension;
pub mod group2;
pub mod isometry;
pub mod metric;
pub mod oracle;
pub mod orbit;
pub mod rational;
pub mod rng;
pub mod toeplitz;

pub use error::{Error, Interval, Result, SpecViolation};
pub use extension::{
    check_extension_spec, generic_space, sphere_diameter_bound, DistanceSpec, GrowingSpace,
    LogEntry, ValueDomain,
};
pub use metric::{tuples_isometric, validate_matrix, FiniteMetricSpace, ValidationReport, Violation};
pub use rational::Rational;
pub use toeplitz::{
    is_admissible, is_toeplitz, prolong, universal_prefix, verify_window_realization,
    ToeplitzPrefix,
};
