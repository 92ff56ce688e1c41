//! Numerical tolerances shared across the crate.

/// Slack for comparisons of probabilities, partial sums and norms.
pub const COMPARE: f64 = 1e-9;

/// Negative entries at or above `-CLAMP` are clamped to zero on construction.
pub const CLAMP: f64 = 1e-12;

/// Amplitudes with modulus above this count towards the support.
pub const SUPPORT: f64 = 1e-9;

/// Matrix entries with modulus above this count as nonzero in incoherence checks.
pub const NONZERO: f64 = 1e-9;

/// Branches with probability at or below this are pruned.
pub const PRUNE: f64 = 1e-12;

/// Tail sums at or below this are treated as zero in the conversion formula.
pub const ZERO_TAIL: f64 = 1e-12;

/// Slack for ratio ties when selecting ladder breakpoints.
pub const RATIO_TIE: f64 = 1e-12;
