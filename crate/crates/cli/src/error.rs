use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Library(#[from] eotmaps::Error),
}

impl CliError {
    /// 3 for numerical failures, 2 for everything the user can fix by changing the input.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(
                eotmaps::Error::Convergence { .. }
                | eotmaps::Error::Numerical(_)
                | eotmaps::Error::PlanNotConverged(_),
            ) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
