//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Two per-pixel buffers (frames, masks, ground truth) disagree on dimensions.
    #[error("shape mismatch: expected {expected_width}x{expected_height}, got {width}x{height}")]
    Shape {
        expected_width: usize,
        expected_height: usize,
        width: usize,
        height: usize,
    },

    /// A configuration or parameter set failed validation.
    #[error("invalid config: {0}")]
    Config(String),

    /// An operation received an input it cannot work on (empty frame, empty warmup, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// A serialized record (sparse file, sequence file, sidecar) is malformed.
    #[error("corrupt record: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(expected: (usize, usize), got: (usize, usize)) -> Self {
        Error::Shape {
            expected_width: expected.0,
            expected_height: expected.1,
            width: got.0,
            height: got.1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
