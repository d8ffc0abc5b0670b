use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix dimension {0} not supported (expected 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("value is not an eigenvalue (distance to spectrum {distance:e})")]
    NotAnEigenvalue { distance: f64 },

    #[error("eigenvector pair is near-defective (gap {gap:e}, |<l|r>| {overlap:e})")]
    NearDefective { gap: f64, overlap: f64 },

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("Newton refinement did not converge after {iterations} iterations (|D| = {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Newton iterate left the search region at ({alpha}, {beta})")]
    EscapedRegion { alpha: f64, beta: f64 },

    #[error("ambiguous eigenvalue matching at loop parameter t = {t} (bisection depth {depth})")]
    AmbiguousMatching { t: f64, depth: usize },

    #[error("loop passes within {distance:e} of the exceptional point at ({alpha}, {beta})")]
    LoopTooCloseToEP { alpha: f64, beta: f64, distance: f64 },

    #[error("index out of range: ({i}, {j}) for n = {n}")]
    IndexOutOfRange { n: usize, i: usize, j: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("generator count {0} outside 1..=5")]
    InvalidGeneratorCount(usize),
}

impl Error {
    /// Stable short name, used by the CLI when reporting failures.
    pub fn name(&self) -> &'static str {
        match self {
            Error::UnsupportedDimension(_) => "UnsupportedDimension",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonFinite(_) => "NonFinite",
            Error::NotAnEigenvalue { .. } => "NotAnEigenvalue",
            Error::NearDefective { .. } => "NearDefective",
            Error::InvalidFamily(_) => "InvalidFamily",
            Error::InvalidRegion(_) => "InvalidRegion",
            Error::InvalidLoop(_) => "InvalidLoop",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::EscapedRegion { .. } => "EscapedRegion",
            Error::AmbiguousMatching { .. } => "AmbiguousMatching",
            Error::LoopTooCloseToEP { .. } => "LoopTooCloseToEP",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::InvalidPermutation(_) => "InvalidPermutation",
            Error::InvalidGeneratorCount(_) => "InvalidGeneratorCount",
        }
    }
}
