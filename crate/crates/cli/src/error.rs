use std::path::Path;

use thiserror::Error;

use crate::stage::Stage;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error("stage `{stage}` needs {missing}; run `linkmine {upstream}` first")]
    Ordering {
        stage: Stage,
        upstream: Stage,
        missing: String,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Ordering { .. } => 3,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }
}

impl From<linkmine::Error> for CliError {
    fn from(e: linkmine::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
