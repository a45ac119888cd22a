use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (relative asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("basis is not linearly independent (smallest normalized Gram eigenvalue {0:.3e})")]
    DependentBasis(f64),

    #[error("element lies outside the span of the basis (residual {0:.3e})")]
    OutsideSpan(f64),

    #[error("inconsistent representations: {0}")]
    Inconsistent(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
