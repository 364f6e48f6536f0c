//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by scoring, training, and file loading.
#[derive(Debug, Error)]
pub enum KisError {
    /// Input text is empty or whitespace-only.
    #[error("input is empty or whitespace-only")]
    EmptyInput,

    /// Text contains no word or number tokens.
    #[error("text contains no word tokens")]
    NoWords,

    /// A language-model training corpus was empty.
    #[error("training corpus is empty")]
    EmptyCorpus,

    /// Push attempted on a full training buffer that has not been drained.
    #[error("training buffer is full; retrain the discriminator to drain it")]
    BufferFull,

    /// Retrain attempted before the buffer reached capacity.
    #[error("training buffer holds {len} of {capacity} items; retrain requires a full buffer")]
    BufferNotFull { len: usize, capacity: usize },

    /// Retrain attempted on a buffer missing one of the two labels.
    #[error("training buffer must contain both authentic and generated samples")]
    DegenerateBuffer,

    /// The original text has no maskable (non-stopword) tokens.
    #[error("original text has no maskable tokens")]
    NoMaskableTokens,

    /// A reference-based metric was requested without references.
    #[error("at least one reference is required")]
    NoReferences,

    /// Lambda calibration cannot reach the requested target mean.
    #[error("target mean {target} unreachable: mean score at lambda = {lambda_max:.0} is {achieved}")]
    Unreachable {
        target: f64,
        lambda_max: f64,
        achieved: f64,
    },

    /// A component score left the [0, 1] range.
    #[error("component score {name} = {value} outside [0, 1]")]
    ComponentOutOfRange { name: &'static str, value: f64 },

    /// Training produced a non-finite gradient.
    #[error("non-finite gradient at training step {step}")]
    NonFiniteGradient { step: usize },

    /// A configuration value violates its documented constraints.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A data file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, KisError>;
