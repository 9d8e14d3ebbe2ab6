use thiserror::Error;

use crate::intersect::PerturbationCertificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice basis is rank deficient")]
    RankDeficient,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("polarization is not integral: {0}")]
    NotIntegral(String),
    #[error("pairing is not positive definite (leading minor {index} = {value})")]
    NotPositiveDefinite { index: usize, value: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vector is not a period of the torus")]
    NotAPeriod,
    #[error("operands live on different tori")]
    TorusMismatch,
    #[error("element has augmentation {0}, expected 0")]
    NotDegreeZero(String),
    #[error("complexes do not intersect transversely ({0} violations)")]
    NotTransverse(usize),
    #[error("perturbation search exhausted {max_trials} trials on hypersurface {hypersurface}")]
    Exhausted {
        max_trials: usize,
        hypersurface: usize,
        partial: Box<PerturbationCertificate>,
    },
    #[error("malformed complex: {0}")]
    MalformedComplex(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}
