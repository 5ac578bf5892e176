use thiserror::Error;

pub type Result<T> = std::result::Result<T, OcnError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OcnError {
    #[error("invalid dimension n = {0} (need n >= 2)")]
    InvalidDimension(usize),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("division by the zero polynomial")]
    ZeroDivisor,

    #[error("polynomial degree {0} too small for this operation")]
    DegreeTooSmall(usize),

    #[error("singular configuration: {what} = {value:e}")]
    SingularConfiguration { what: &'static str, value: f64 },

    #[error("non-finite value in output component {output} when perturbing coordinate {coordinate}")]
    NonFinite { coordinate: usize, output: usize },

    #[error("parameter point outside the admissible set: {0}")]
    Inadmissible(String),

    #[error("embedding system infeasible for n = {n}: {equations}x{unknowns} system is overdetermined")]
    InfeasibleShape { n: usize, equations: usize, unknowns: usize },

    #[error("rank deficient: observed rank {observed}, expected {expected}")]
    RankDeficient { observed: usize, expected: usize },

    #[error("non-positive dominance margin {margin:e} for pair (i={i}, j={j})")]
    NonPositiveMargin { i: usize, j: usize, margin: f64 },

    #[error("smoothing width {mu:e} exceeds the admissible bound {bound:e}")]
    SmoothingTooWide { mu: f64, bound: f64 },

    #[error("convexity budget exceeded: sum |H~| = {used:e} >= {allowed:e}")]
    ConvexityBudgetExceeded { used: f64, allowed: f64 },

    #[error("cutoff supports overlap: {0}")]
    OverlappingSupports(String),

    #[error("evaluation left the working zone of base point {index} (distance {distance:e} > {radius:e}); use a smaller rho-ball")]
    ZoneViolation { index: usize, distance: f64, radius: f64 },

    #[error("Newton iteration did not converge: residual trace {trace:?}")]
    NonConvergence { trace: Vec<f64> },

    #[error("Jacobian singular: {0}")]
    JacobianSingular(String),

    #[error("repeated root: discriminant {0:e}")]
    RepeatedRoot(f64),

    #[error("invalid configuration: {0}")]
    Config(String),
}
