use std::path::PathBuf;

use simvar_core::simpson::IntegrationError;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("unknown preset `{0}`; available presets: {list}", list = simvar_core::systems::PRESET_NAMES.join(", "))]
    UnknownPreset(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(#[from] simvar_core::Error),
    #[error("integration failed at step {step}: {cause}")]
    Integration {
        step: usize,
        cause: simvar_core::Error,
        /// Where the partial output was written, if anywhere.
        partial: Option<PathBuf>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("config: {0}")]
    Config(#[from] toml::de::Error),
    #[error("validation failed: {0}")]
    ValidationFailed(String),
}

impl AppError {
    /// 2 for usage errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::UnknownPreset(_) | AppError::Usage(_) | AppError::Config(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<IntegrationError> for AppError {
    fn from(e: IntegrationError) -> Self {
        AppError::Integration {
            step: e.step,
            cause: e.cause,
            partial: None,
        }
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
