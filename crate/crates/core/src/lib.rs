//! Special τ_N-configurations in ℝ^{2×n} × ℝ^{2×n}, polyconvex energies whose
//! gradient graph carries them, and numerical certificates for the openness
//! condition (OC)_N.

pub mod embed;
pub mod error;
pub mod linalg;
pub mod model;
pub mod tau;
pub mod verify;

pub use error::{OcnError, Result};
