//! Shared numerical tolerances.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Exact matrix algebra: Hermiticity, trace, round trips.
    pub algebraic: f64,
    /// Quantities produced by a time integrator.
    pub integrator: f64,
    /// Minimum |1+z| or |1-z²| before an invariant is refused.
    pub pole_guard: f64,
    /// Relative singular-value threshold for pointwise rank.
    pub rank: f64,
    /// Polynomial coefficients below this are dropped.
    pub coefficient: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        algebraic: 1e-12,
        integrator: 1e-9,
        pole_guard: 1e-6,
        rank: 1e-8,
        coefficient: 1e-13,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
