//! Continuously monitored qubit: stochastic master equation integration,
//! deterministic submanifolds, closed-form state distributions and a
//! Lie-rank test for the dimension of the reachable support.
//!
//! The crate is organised bottom-up:
//!
//! - [`qubit`]: 2×2 complex matrices, density matrices, Bloch vectors and the
//!   Lindblad superoperators `F_L` and `G_L`.
//! - [`rng`] and [`sde`]: counter-based Wiener increments and the Itô
//!   Euler–Maruyama integrator with measurement records.
//! - [`invariants`]: the conserved or deterministically evolving coordinates
//!   of the four standard measurement setups.
//! - [`special`], [`quadrature`], [`distributions`]: special functions and
//!   the analytic densities, with Kolmogorov–Smirnov comparison against
//!   simulated ensembles.
//! - [`poly`] and [`accessibility`]: exact polynomial vector fields on the
//!   Bloch ball, Lie brackets, closure and the dimension verdict.

pub mod accessibility;
pub mod distributions;
mod error;
pub mod invariants;
pub mod poly;
pub mod quadrature;
pub mod qubit;
pub mod rng;
pub mod sde;
pub mod special;
pub mod tolerance;

pub use error::{Error, Result};
pub use qubit::{BlochVector, ComplexMatrix2, DensityMatrix, LindbladChannel, ModelSpec};
pub use tolerance::Tolerances;

/// Library version, recorded in artifact provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
