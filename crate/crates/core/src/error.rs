use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("tensor product of {0} entries exceeds the 2^20 entry limit")]
    DimensionOverflow(usize),

    #[error("unknown basis factor `{0}`")]
    UnknownFactor(String),

    #[error("duplicate basis factor `{0}`")]
    DuplicateFactor(String),

    #[error("matrix is not Hermitian (max |M - M^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("matrix is not unitary (max |U^dagger U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("zero vector has no normalized direction")]
    ZeroVector,

    #[error("state has zero trace")]
    ZeroTrace,

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("net gain is defined for equal couplings only (theta1 = {0}, theta2 = {1})")]
    AsymmetricCoupling(f64, f64),

    #[error("nothing retained: P_R + w P_U = {0:e}")]
    NothingRetained(f64),
}
