use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: qfp_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn core(context: impl Into<String>, source: qfp_core::Error) -> Self {
        CliError::Core {
            context: context.into(),
            source,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 config, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Io { .. } => 3,
            CliError::Core { source, .. } => match source.class() {
                qfp_core::ErrorClass::Data => 3,
                qfp_core::ErrorClass::Numerical => 4,
            },
        }
    }
}

pub trait Context<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for qfp_core::Result<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| CliError::core(ctx(), e))
    }
}
