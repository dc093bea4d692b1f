use std::path::PathBuf;

pub const EXIT_IO: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NON_CONVERGENCE: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Library(#[from] monitored_qubit::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 for file I/O, 3 when a numerical routine did not converge, 2 for
    /// everything else the caller got wrong.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Library(e) if e.is_non_convergence() => EXIT_NON_CONVERGENCE,
            CliError::Library(_) | CliError::Invalid(_) => EXIT_INVALID,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
