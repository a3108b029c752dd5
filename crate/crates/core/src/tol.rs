//! Numerical tolerances shared across the crate.

/// Child conditional probabilities must sum to one within this bound.
pub const PROB_SUM: f64 = 1e-12;

/// Default tolerance for martingale tests.
pub const MARTINGALE: f64 = 1e-9;

/// Pivoting and phase-one feasibility tolerance of the simplex kernel.
pub const LP_PIVOT: f64 = 1e-9;

/// Tolerance at which LP-derived decisions are reported.
pub const LP_REPORT: f64 = 1e-8;

/// Slack separating "strictly inside" from solver noise in relative
/// interior tests.
pub const GEOMETRY_SLACK: f64 = 1e-7;

/// Minimal optimal margin for a price system to count as strictly
/// consistent.
pub const STRICT_DELTA: f64 = 1e-7;

/// Zero test used by the double description method on normalized vectors.
pub const DD_ZERO: f64 = 1e-9;

/// Box bound on dual variables for non-conical models.
pub const DUAL_BOX: f64 = 1e3;

/// A dual bound at or below this value certifies superhedging.
pub const DUAL_ZERO: f64 = 1e-6;
