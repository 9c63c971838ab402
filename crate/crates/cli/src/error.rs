use std::path::{Path, PathBuf};

use tabx_core::data::DataError;
use tabx_core::eval::EvalError;
use tabx_core::explain::ExplainError;
use tabx_core::nn::NnError;
use tabx_core::select::SelectError;
use tabx_core::zoo::ZooError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(#[from] DataError),
    #[error("feature selection failed: {0}")]
    Select(#[from] SelectError),
    #[error("model error: {0}")]
    Zoo(#[from] ZooError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("explanation failed: {0}")]
    Explain(#[from] ExplainError),
    #[error("unknown subject '{0}'")]
    UnknownSubject(String),
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("manifest check failed: {0}")]
    Integrity(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for data
    /// problems, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_)
            | CliError::Zoo(ZooError::UnknownKind(_))
            | CliError::Zoo(ZooError::Nn(NnError::InvalidConfig(_)))
            | CliError::Explain(ExplainError::UnknownMetric(_))
            | CliError::Explain(ExplainError::TooFewSamples { .. })
            | CliError::Explain(ExplainError::TooManyFeatures { .. }) => 2,
            CliError::Zoo(ZooError::Nn(_)) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
