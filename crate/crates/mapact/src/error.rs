//! Error types shared across the harness.

use thiserror::Error;

/// Unified error type for all harness operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Two values that must share an environment family did not.
    #[error("environment mismatch: expected {expected}, got {got}")]
    EnvMismatch { expected: String, got: String },

    /// Parsing a serialized artifact failed. Carries the byte offset of the
    /// first offending byte so truncated or corrupt streams are diagnosable.
    #[error("parse error at byte {offset} (line {line}): {message}")]
    Parse {
        offset: usize,
        line: usize,
        message: String,
    },

    /// A precondition on an operation's inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Action was applied to a terminal environment.
    #[error("environment is terminal; no further steps accepted")]
    Terminal,

    /// World generation could not produce a solvable instance.
    #[error("unsolvable generation for seed {seed} after {attempts} attempts")]
    Unsolvable { seed: u64, attempts: u32 },

    /// A prompt context was missing a field the role template requires.
    #[error("missing prompt context field: {0}")]
    MissingContext(&'static str),

    /// The configured backend does not implement the requested role.
    #[error("backend does not implement role {0}")]
    UnsupportedRole(String),

    /// Remote backend failure after exhausting retries.
    #[error("backend error: {0}")]
    Backend(String),

    /// Configuration file or flag error.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Convert a serde_json error into a [`Error::Parse`] with a byte offset
    /// computed against the source text.
    pub fn from_json(err: &serde_json::Error, source: &str) -> Self {
        let line = err.line();
        let column = err.column();
        let offset = source
            .split_inclusive('\n')
            .take(line.saturating_sub(1))
            .map(str::len)
            .sum::<usize>()
            + column.saturating_sub(1);
        Error::Parse {
            offset,
            line,
            message: err.to_string(),
        }
    }
}
