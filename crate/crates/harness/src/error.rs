//! Error type for the experiment driver, with the process exit code each
//! class of failure maps to: 1 for usage and configuration problems, 2 for
//! trial failures, 3 for I/O.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad invocation: invalid flag values, semantically invalid
    /// configuration, malformed input files.
    #[error("{0}")]
    Usage(String),

    /// Config file parse error, with its 1-based line number.
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    /// A split that would leave some part empty.
    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    /// One experiment trial failed; the suite reports it and keeps going.
    #[error("trial with seed {seed} failed: {message}")]
    Trial { seed: u64, message: String },

    /// Filesystem trouble.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub(crate) fn usage(message: impl Into<String>) -> Self {
        Self::Usage(message.into())
    }

    /// The process exit code this error maps to.
    #[must_use]
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Config { .. } | Self::DegenerateSplit(_) => 1,
            Self::Trial { .. } => 2,
            Self::Io(_) => 3,
        }
    }
}
