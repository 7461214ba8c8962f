use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Solver(#[from] nsfd::Error),

    /// The run finished but some result did not converge.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 0 success, 1 non-convergence, 2 configuration error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Solver(e) => match e {
                nsfd::Error::Config(_) | nsfd::Error::Domain { .. } | nsfd::Error::Usage(_) => 2,
                _ => 1,
            },
            CliError::Failed(_) => 1,
        }
    }
}
