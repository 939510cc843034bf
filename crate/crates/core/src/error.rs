use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not a valid density matrix: {0}")]
    NotPhysical(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("seed violates the flat-amplitude condition at component {index}: |b|^2 = {modulus_sq}, expected {expected}")]
    InvalidSeed { index: usize, modulus_sq: f64, expected: f64 },
    #[error("invalid optical configuration: {0}")]
    InvalidConfig(String),
    #[error("diffraction envelope factor {factor:e} at position {position} is below the calibration floor")]
    IllConditionedEnvelope { position: usize, factor: f64 },
    #[error("measurement set is not informationally complete: {0}")]
    NotInformationallyComplete(String),
    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input). The CLI
    /// maps these to exit code 3.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_)
                | Error::NotInformationallyComplete(_)
                | Error::IllConditionedEnvelope { .. }
        )
    }
}
