//! The polyconvex energy whose gradient graph carries the configuration.

pub mod convex_g;
pub mod cutoff;
pub mod energy;
pub mod interp;
pub mod probes;
pub mod smooth;

pub use convex_g::{build_g, build_g_default, pieces_from_embedding, smoothing_bound, AffinePiece, ConvexG, GJet};
pub use cutoff::{certified_c0, cutoff_v, CutoffJet};
pub use energy::{build_f, build_f_tilde, exact_radius, lift, min_separation, BaseEnergy, GraphMap, Jet, Perturbation, SigmaModel};
pub use interp::LocalInterpolant;
pub use probes::{lifted_midpoint_probe, rank_one_probe, ProbeReport, RankOneReport};
