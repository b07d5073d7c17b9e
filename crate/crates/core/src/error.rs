use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the corpus, model and evaluation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate scale: both head-shoulder distances are zero")]
    DegenerateScale,

    #[error("sign has {len} frames but the padded length is {max}")]
    TooLong { len: usize, max: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invariant violation ({check}) at line {line}: {message}")]
    InvariantViolation {
        line: usize,
        check: &'static str,
        message: String,
    },

    #[error("not enough data: need {needed} frames, found {available}")]
    NotEnoughData { needed: usize, available: usize },

    #[error("state {0} is absorbing (T[i,i] = 1): hold length is infinite")]
    AbsorbingState(usize),

    #[error("empty batch")]
    EmptyBatch,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input (as opposed to I/O failures).
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
