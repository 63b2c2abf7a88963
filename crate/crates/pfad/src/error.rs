//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, PfadError>;

/// Everything that can go wrong in the library.
///
/// Validation failures carry enough context to name the offending
/// parameter or file; IO errors are passed through untouched.
#[derive(Debug, Error)]
pub enum PfadError {
    /// Two rasters that must agree in shape do not.
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    /// A parameter is outside its documented range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// Pixel data that must lie in [0, 1] (or be finite) does not.
    #[error("invalid pixel data: {0}")]
    InvalidPixels(String),

    /// A diffusion step index is outside 1..=T.
    #[error("step {step} out of range 1..={t_max}")]
    StepOutOfRange { step: usize, t_max: usize },

    /// The purification latent picked up a NaN or infinity.
    #[error("non-finite latent at step {step}")]
    NonFiniteLatent { step: usize },

    /// Training loss stopped being a number.
    #[error("training diverged: non-finite loss at step {step}")]
    TrainingDiverged { step: usize },

    /// The training corpus is empty (or smaller than the hold-out split).
    #[error("training corpus too small: {0}")]
    CorpusTooSmall(String),

    /// A configuration key nobody registered.
    #[error("unknown configuration key `{0}`")]
    UnknownConfigKey(String),

    /// A configuration value that does not parse or violates its range.
    #[error("invalid value for configuration key `{key}`: {reason}")]
    ConfigValue { key: String, reason: String },

    /// A malformed configuration line (missing `=`, empty key, ...).
    #[error("malformed configuration line {line}: {reason}")]
    ConfigSyntax { line: usize, reason: String },

    /// Checkpoint file is malformed, truncated, or version-incompatible.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// Dataset manifest is malformed or inconsistent with the files on disk.
    #[error("manifest error: {0}")]
    Manifest(String),

    /// Image file decode/encode failure.
    #[error("image file error: {0}")]
    ImageFile(String),

    /// Statistical test preconditions violated (empty sample, NaN, ...).
    #[error("invalid sample for rank test: {0}")]
    InvalidSample(String),

    /// Plain IO.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
