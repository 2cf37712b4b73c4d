use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("requested rank {requested} but the numerical rank is {numerical}")]
    RankMismatch { requested: usize, numerical: usize },

    #[error("edge probability {value} for pair ({i}, {j}) is outside [0, 1]")]
    ProbabilityOutOfRange { i: usize, j: usize, value: f64 },

    #[error("vertex {0} has zero degree")]
    ZeroDegreeVertex(usize),

    #[error("vertex {0} has zero expected degree")]
    ZeroExpectedDegree(usize),

    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("selected eigenvalue {index} is negative ({value:e})")]
    NegativeTopEigenvalue { index: usize, value: f64 },

    #[error("second-moment matrix is singular")]
    SingularDelta,

    #[error("block probability matrix is singular")]
    SingularB,

    #[error("atom {0} has a nonpositive inner product with the mean latent position")]
    NonpositiveMeanInnerProduct(usize),

    #[error("block {0} has no members")]
    EmptyBlock(usize),

    #[error("t = {0} is outside (0, 1)")]
    InvalidT(f64),

    #[error("fewer than {0} distinct points")]
    DegeneratePoints(usize),

    #[error("covariance of mixture component {0} is not positive definite after ridging")]
    CovarianceCollapse(usize),

    #[error("label matching supports at most 10 blocks, got {0}")]
    TooManyBlocks(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
