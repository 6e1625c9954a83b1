//! Recorded constants for the empirical bounds checked by the test suites.

/// Per-cell cluster count bound: `clusters(A) <= C * lambda * sqrt(semi-size(V ∩ 6A))`.
pub const CLUSTER_COUNT_C: f64 = 2.0;

/// Separator size bound: `|S| <= C_SEP * lambda * sqrt(region size)`.
pub const C_SEP: f64 = 2.0;

/// Balance of a separator: every remaining part has at most this fraction of the region.
pub const BALANCE: f64 = 2.0 / 3.0;

/// Regions at most this large are leaves of the separator hierarchy.
pub const LEAF_REGION: usize = 32;
