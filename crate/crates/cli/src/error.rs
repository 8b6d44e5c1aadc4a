use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lyastep_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("unknown experiment `{0}` (try --list)")]
    UnknownExperiment(String),
    #[error("experiment `{experiment}` has no parameter `{name}`")]
    UnknownParam { experiment: String, name: String },
    #[error("parameter `{name}`: cannot parse `{value}`")]
    BadParam { name: String, value: String },
}

impl CliError {
    /// Usage errors exit with 2, everything else with 1.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            CliError::Config(_)
                | CliError::UnknownExperiment(_)
                | CliError::UnknownParam { .. }
                | CliError::BadParam { .. }
        )
    }
}

pub type CliResult<T> = Result<T, CliError>;
