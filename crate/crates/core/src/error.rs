use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// `|phi_n|` never reaches `n^-gamma` on `[0, ln n]`.
    #[error("frequency not found: |ecf| stays above n^-gamma = {threshold:.6} on [0, ln n] (n = {n}, gamma = {gamma}); try a larger gamma")]
    FrequencyNotFound { n: usize, gamma: f64, threshold: f64 },

    #[error("degenerate estimate: sigma0^2 = {sigma0_sq} is not positive")]
    DegenerateEstimate { sigma0_sq: f64 },

    /// Invalid configuration, reported with the offending field path.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("index mismatch: {0}")]
    IndexMismatch(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }
}
