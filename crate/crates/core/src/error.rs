use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed problem document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("joint row {row} is an uncertainty-free row (b = 0); fold the condition into the polytope G x <= h")]
    UncertaintyFreeRow { row: usize },

    #[error("risk level epsilon = {0} must lie strictly inside (0, 1)")]
    Epsilon(f64),

    #[error("invalid Wasserstein radius theta = {0}")]
    Radius(f64),

    #[error(
        "exact reformulation requires theta > 0; at theta = 0 use the classical scenario formulation (method `classical`)"
    )]
    ZeroRadius,

    #[error("invalid norm: {0}")]
    Norm(String),

    #[error("the {0} norm is export-only; in-process solving supports the 1-norm and the inf-norm")]
    ExportOnlyNorm(String),

    #[error("feasible region is unbounded along coordinate {coordinate}")]
    Unbounded { coordinate: usize },

    #[error("feasible region G x <= h is empty")]
    EmptyPolytope,

    #[error(
        "degenerate safety normal b - A^T x = 0 at the optimum; solve the {} strict variants:\n  {}",
        variants.len(),
        variants.join("\n  ")
    )]
    DegenerateNormal { variants: Vec<String> },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("model contains second-order cone rows; export it for an external conic solver")]
    ConeRows,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("bisection bracket failure: {0}")]
    Bracket(String),

    #[error("no candidate radius is feasible")]
    NoFeasibleRadius,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
