//! Linear embedding conditions that make the configuration's first components
//! lie in the gradient graph of a convex function.

pub mod forms;
pub mod margins;
pub mod system;

pub use forms::{pairing_forms, PairingForms};
pub use margins::{check_emb2, cx0_margins, q_from_emb1, select_epsilon, EpsilonChoice, PairMargins};
pub use system::{
    assemble_system, compatible_c, left_null_space, ordered_pairs, solve_embedding, solve_embedding_compatible,
    EmbedData, EmbedSolution, EmbedSystem,
};
