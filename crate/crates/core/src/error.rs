use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index count must be at least 1")]
    EmptyIndexSet,
    #[error("index {index} is outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("size mismatch: expected {expected} indices, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("invalid moments at index {index}: {reason}")]
    InvalidMoments { index: usize, reason: String },
    #[error("invalid input `{name}`: {reason}")]
    InvalidInput { name: &'static str, reason: String },
    #[error("at least 2 replicates are required, found {found}")]
    TooFewReplicates { found: usize },
    #[error("non-finite value in replicate {replicate}, index {index}")]
    NonFinite { replicate: usize, index: usize },
    #[error("sample set is empty")]
    EmptySample,
    #[error("probability {0} is outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("printed closed forms require n >= 10, got n = {n}")]
    ClosedFormDomain { n: usize },
    #[error("case index {0} is outside 1..=5")]
    CaseOutOfRange(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidInput {
        name,
        reason: reason.into(),
    }
}
