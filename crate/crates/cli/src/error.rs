use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Module {
        context: String,
        #[source]
        source: ldlab_core::Error,
    },
    #[error("{0}")]
    Diverged(String),
    #[error("manifest missing: {0}")]
    ManifestMissing(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) | CliError::ManifestMissing(_) => 2,
            CliError::Module { .. } | CliError::Diverged(_) | CliError::Io(_) => 3,
        })
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches context to core errors raised while an experiment runs.
pub trait Context<T> {
    fn context(self, what: impl Into<String>) -> CliResult<T>;
}

impl<T> Context<T> for ldlab_core::Result<T> {
    fn context(self, what: impl Into<String>) -> CliResult<T> {
        self.map_err(|source| CliError::Module {
            context: what.into(),
            source,
        })
    }
}

/// Core errors met while reading the config are validation failures.
pub fn invalid(what: &str) -> impl FnOnce(ldlab_core::Error) -> CliError + '_ {
    move |e| CliError::Config(format!("{what}: {e}"))
}
