use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] chidt::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 2 for I/O failures, 1 for everything the user can fix in the inputs.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Invalid(_) | CliError::Core(_) => 1,
        }
    }
}
