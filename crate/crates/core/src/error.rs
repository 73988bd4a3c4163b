use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("factor index {index} out of range for a matrix with {count} factors")]
    InvalidFactor { index: usize, count: usize },

    #[error("matrix is not Hermitian (max |m - m^dagger| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("the all-identity Pauli string has no -1 eigenspace")]
    IdentityPauli,

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("invalid quantum channel: {0}")]
    InvalidChannel(String),

    #[error("invalid pseudo-density matrix: {0}")]
    InvalidPdm(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("PDM is inconsistent with any channel (residual {residual:.3e})")]
    Inconsistent { residual: f64 },

    #[error("unknown channel id `{0}`")]
    UnknownChannel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that come from numerics rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Inconsistent { .. })
    }
}
