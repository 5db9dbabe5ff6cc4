use std::path::PathBuf;

/// Errors of the scenario runner.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    /// Malformed TOML or unknown key.
    #[error("parse error: {0}")]
    Parse(String),
    /// A value failed validation.
    #[error("invalid {field}: {reason}")]
    Invalid {
        /// `section.key` of the offending value.
        field: String,
        /// What is wrong with it.
        reason: String,
    },
    /// Reading or writing a file failed.
    #[error("{}: {source}", path.display())]
    Io {
        /// File involved.
        path: PathBuf,
        /// Underlying error.
        #[source]
        source: std::io::Error,
    },
    /// The simulation itself failed.
    #[error(transparent)]
    Core(#[from] emc_core::Error),
}
