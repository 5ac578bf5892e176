//! Parametrized τ_N-configurations in ℝ^{2×n} × ℝ^{2×n}.

pub mod config;
pub mod derivatives;
pub mod dims;
pub mod frames;
pub mod param;

pub use config::{build_tau, eta_from_frames, eta_of, TauConfig, TauResiduals};
pub use derivatives::{config_jacobians, outer_jacobian, rank_zeta, zeta_vec, ConfigJacobians, DEFAULT_STEP};
pub use dims::{dims, DimSummary};
pub use frames::{
    alpha, assemble_t, b_row, build_frames, check_set_v, delta_det, frame_vectors, q_vector, slot,
    solve_p, solve_yz, FrameData, FrameVectors, SetVReport, SumResiduals,
};
pub use param::{Layout, ParamU};
