//! Qubit states, Pauli algebra and the Lindblad superoperators.
//!
//! Basis convention: index 0 is the excited state `|e⟩` (z = +1), index 1 the
//! ground state `|g⟩`. Hence `σ_z = diag(1, -1)` and `σ_- = |g⟩⟨e|`.

mod matrix;
mod model;
mod state;
mod superop;

pub use matrix::ComplexMatrix2;
pub use model::{LindbladChannel, ModelSpec};
pub use state::{bloch_from_density, density_from_bloch, BlochVector, DensityMatrix};
pub use superop::{superop_f, superop_g};
pub(crate) use superop::{f_raw, g_raw};
