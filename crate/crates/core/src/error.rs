use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("input states are not orthonormal (Gram deviation {deviation:.3e})")]
    NonOrthonormalInput { deviation: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("operator is not Hermitian (max |A - A†| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("expectation value has imaginary part {imaginary:.3e}")]
    NonRealExpectation { imaginary: f64 },

    #[error("Hermitian eigensolver did not converge for a {dim}x{dim} matrix")]
    EigensolverFailure { dim: usize },

    #[error("singular value decomposition did not converge")]
    SvdFailure,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}
