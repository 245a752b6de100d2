//! Command-line error kinds and their exit codes.

use std::path::Path;

/// Failure of a command, rendered as a single `error[kind]: message` line.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or parameter values. Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Malformed input file. Exit code 3.
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    /// Input that parses but does not fit together, such as a label file of
    /// the wrong length. Exit code 3.
    #[error("{0}")]
    Input(String),
    /// Unreadable or unwritable file. Exit code 3.
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    /// An algorithm failed on valid input. Exit code 4.
    #[error(transparent)]
    Numeric(dcd_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse { .. } | CliError::Input(_) | CliError::Io { .. } => 3,
            CliError::Numeric(_) => 4,
        }
    }

    /// Stable machine-readable tag printed before the message.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Parse { .. } => "parse",
            CliError::Input(_) => "input",
            CliError::Io { .. } => "io",
            CliError::Numeric(_) => "numeric",
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

impl From<dcd_core::Error> for CliError {
    fn from(e: dcd_core::Error) -> Self {
        use dcd_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::InvalidModel(_) | E::InvalidDegreeLaw(_) | E::TooManyClusters { .. } => {
                CliError::Usage(e.to_string())
            }
            E::NodeOutOfRange { .. } | E::SelfLoop(_) | E::LengthMismatch { .. } | E::LabelOutOfRange { .. } => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Numeric(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
