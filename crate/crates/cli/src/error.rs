use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] morsebott::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for anything wrong with the input (config, unknown names, files),
    /// 1 for a pipeline that ran and failed.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(e) if is_input_error(e) => 2,
            CliError::Core(_) => 1,
        }
    }
}

pub(crate) fn is_input_error(e: &morsebott::Error) -> bool {
    matches!(e, morsebott::Error::Config(_) | morsebott::Error::NotFound { .. })
}
