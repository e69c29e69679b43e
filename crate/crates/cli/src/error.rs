use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error("estimation failed: {0}")]
    Estimation(nullfreq::Error),
    #[error("config error in {file}: {message}")]
    Config { file: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Input { .. } => 2,
            CliError::Estimation(_) => 3,
            CliError::Config { .. } => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl std::fmt::Display, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_string(), source }
    }

    /// Config errors from the core keep their field path.
    pub(crate) fn from_core(file: &str, e: nullfreq::Error) -> Self {
        match e {
            nullfreq::Error::Config { path, message } => {
                CliError::Config { file: file.to_string(), message: format!("{path}: {message}") }
            }
            other => CliError::Estimation(other),
        }
    }
}

impl From<nullfreq::Error> for CliError {
    fn from(e: nullfreq::Error) -> Self {
        CliError::from_core("<built-in>", e)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
