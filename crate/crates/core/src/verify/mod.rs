//! Numerical certification of the openness condition (OC)_N.

pub mod ball;
pub mod base;
pub mod build;
pub mod certificate;
pub mod eigen;
pub mod newton;
pub mod psi;
pub mod search;
pub mod sweep;
pub mod thresholds;
#[cfg(test)]
pub(crate) mod testing;
