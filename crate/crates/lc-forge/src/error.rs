//! Error type shared by every module of the toolkit.

use thiserror::Error;

/// Errors produced by signal ingestion, level generation, sampling emulation,
/// optimization and experiment orchestration.
#[derive(Debug, Error)]
pub enum LcError {
    /// A caller-supplied value violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An input file does not parse under its declared format.
    #[error("malformed input: {0}")]
    Format(String),

    /// An input file parses but carries unusable content (NaN samples,
    /// negative annotation indices, non-monotone sample indices, ...).
    #[error("bad data: {0}")]
    Data(String),

    /// A signal range with zero width; level generators cannot place levels.
    #[error("degenerate signal range: {0}")]
    DegenerateRange(String),

    /// A numeric procedure failed (singular kernel matrix, non-finite result).
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LcError>;
