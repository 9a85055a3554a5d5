use num_bigint::BigInt;
use thiserror::Error;

use crate::klyachko::IncompatibilityWitness;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{0:?} is not a nonzero primitive integer vector")]
    NotPrimitive(Vec<i64>),

    #[error("matrix is not unimodular (determinant {0})")]
    NotUnimodular(BigInt),

    #[error("invalid fan: {0}")]
    InvalidFan(String),

    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),

    #[error("bundle is incompatible: {0}")]
    Incompatible(IncompatibilityWitness),

    #[error("the zero subspace is not allowed here")]
    ZeroSubspace,

    #[error("the zero vector is not allowed here")]
    ZeroVector,

    #[error("invalid polarization: {0}")]
    InvalidPolarization(String),

    #[error("not globally generated: {0}")]
    NotGloballyGenerated(String),

    #[error("internal verification failed: {0}")]
    Verification(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),
}

impl From<IncompatibilityWitness> for Error {
    fn from(w: IncompatibilityWitness) -> Self {
        Error::Incompatible(w)
    }
}
