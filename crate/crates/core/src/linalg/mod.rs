//! Dense linear algebra shared by every stage of the pipeline.

pub mod dense;
pub mod faddeev;
pub mod fd;
pub mod minors;
pub mod phase;
pub mod poly;
pub mod rank;

pub use faddeev::{faddeev_leverrier, faddeev_leverrier_balanced, CharpolyAdj};
pub use fd::{finite_jacobian, FiniteJacobian};
pub use minors::{minor_count, minor_jacobian, minor_vector};
pub use phase::{flatten_rows, frob_dot, unflatten_rows, PhasePoint, SpaceMatrix};
pub use poly::Poly;
pub use rank::{numeric_rank, RankReport};
