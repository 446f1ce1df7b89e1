//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Image dimensions or pixel payload are unusable.
    #[error("invalid image: {0}")]
    InvalidImage(String),

    /// A region is too small or degenerate for the requested operation.
    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    /// Segmentation produced no candidate lesion.
    #[error("no lesion found: {0}")]
    NoLesionFound(String),

    /// Numeric input violates a precondition (empty, constant, non-finite…).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Not enough samples for a statistical fit.
    #[error("insufficient samples: need {needed}, got {got} ({what})")]
    InsufficientSamples {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    /// Training data contains a single class where two are required.
    #[error("training data must contain both classes")]
    SingleClass,

    /// Feature-vector length differs from what a model was trained on.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A serialized model or manifest failed validation.
    #[error("model format: {0}")]
    ModelFormat(String),

    /// Bad run configuration.
    #[error("config: {0}")]
    Config(String),

    /// A corpus entry failed somewhere in the pipeline; wraps the cause with
    /// the sample id. The cause is part of the message rather than a
    /// `source()` link so callers printing error chains do not repeat it.
    #[error("sample {id}: {cause}")]
    Sample { id: String, cause: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
