use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] twistdensity::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Emit(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Lib(e) => e.code(),
            CliError::Io { .. } => "IO",
            CliError::Emit(_) => "EMIT",
        }
    }

    /// 2 for input the run cannot start from, 1 for failures during it.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(twistdensity::Error::SingularCurve { .. } | twistdensity::Error::Config(_)) => 2,
            CliError::Io { .. } => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "error": { "code": self.code(), "message": self.to_string() } })
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Emit(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Emit(e.to_string())
    }
}
