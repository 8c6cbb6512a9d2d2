use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("trigonometric degree {0} is odd; only even target degrees are supported")]
    OddDegree(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("grid with {m} points cannot represent degree {degree}")]
    GridTooSmall { m: usize, degree: usize },
    #[error("invalid grid size {0}: must be odd and at least 3")]
    InvalidGrid(usize),
    #[error("division leaves a nonzero remainder")]
    NotDivisible,
    #[error("both operands are zero")]
    BothZero,
    #[error("forms are not coprime")]
    NotCoprime,
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("polynomial is not positive at the real root {root}")]
    NegativeAtRealRoot { root: f64 },
    #[error("could not pair the complex roots of h into real quadratic factors")]
    HFactorFailure,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("degree incompatible: {0}")]
    DegreeIncompatible(String),
    #[error("objective became non-finite at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },
    #[error("{vars} variables is too large for a dense Hessian (limit {limit})")]
    TooLargeForDense { vars: usize, limit: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
}
