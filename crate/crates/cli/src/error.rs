use std::path::PathBuf;
use thiserror::Error;

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CONTRACTION: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] biharm::Error),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("output directory {0} is locked by another run")]
    Locked(PathBuf),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("contraction failure: {0}")]
    Contraction(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_config() => EXIT_CONFIG,
            CliError::Core(biharm::Error::Divergence(_)) => EXIT_CONTRACTION,
            CliError::Config(_) | CliError::Locked(_) => EXIT_CONFIG,
            CliError::Contraction(_) => EXIT_CONTRACTION,
            CliError::Verification(_) => EXIT_VERIFICATION,
            _ => EXIT_OTHER,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_CONFIG => "config",
            EXIT_CONTRACTION => "contraction",
            EXIT_VERIFICATION => "verification",
            _ => "runtime",
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Core(biharm::Error::Pole { what: "a", at: 1.0 }).exit_code(), EXIT_CONFIG);
        assert_eq!(CliError::Core(biharm::Error::Divergence("x".into())).exit_code(), EXIT_CONTRACTION);
        assert_eq!(CliError::Core(biharm::Error::NonConvergence("x".into())).exit_code(), EXIT_OTHER);
        assert_eq!(CliError::Verification("x".into()).exit_code(), EXIT_VERIFICATION);
        assert_eq!(CliError::Locked(PathBuf::from("o")).kind(), "config");
    }
}
