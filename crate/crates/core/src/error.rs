use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Hilbert-space dimension {dim} exceeds the dense limit {limit}")]
    DenseLimit { dim: usize, limit: usize },

    #[error("invalid local term: {0}")]
    InvalidTerm(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shifted spectrum [{min}, {max}] is not strictly inside (0, {emax})")]
    SpectrumOutOfRange { min: f64, max: f64, emax: f64 },

    #[error("energy register is already occupied")]
    RegisterOccupied,

    #[error("register layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("eigenphase {phase} lies on the branch cut of the principal logarithm")]
    BranchCut { phase: f64 },

    #[error("spectrum is {distance} from the contour, closer than the required margin {margin}")]
    ContourMargin { distance: f64, margin: f64 },

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
