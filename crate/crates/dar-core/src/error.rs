use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum DarError {
    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("non-finite state at step {step}")]
    NonFiniteState { step: usize },

    #[error("matrix is asymmetric beyond tolerance: |m - m^T|_F = {asymmetry:.3e}")]
    Asymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite: pivot {pivot} is {value:.3e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("rank-deficient input: smallest singular value {smallest:.3e}")]
    RankDeficient { smallest: f64 },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("invalid argument: {context}")]
    InvalidArgument { context: String },

    #[error("empty input: {context}")]
    Empty { context: String },

    #[error("split exceeds series length: need {needed}, have {available}")]
    SplitOverflow { needed: usize, available: usize },

    #[error("solver residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("trial failed at stage {stage}: {message}")]
    TrialStage { stage: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed file {path}: {message}")]
    Malformed { path: String, message: String },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, DarError>;
