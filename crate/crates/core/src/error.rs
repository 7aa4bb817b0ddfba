use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// The variants are grouped by how a caller is expected to react: bad input,
/// a missing capability or nonsmooth point, or a numerical routine that did
/// not converge. The CLI maps these groups to distinct exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("capability missing: {0}")]
    Capability(String),

    #[error("nonsmooth point: {0}")]
    Nonsmooth(String),

    #[error("no convergence: {what} (residual {residual:e})")]
    Convergence { what: String, residual: f64 },

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("internal contract violated: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        Error::Capability(msg.into())
    }

    pub(crate) fn nonsmooth(msg: impl Into<String>) -> Self {
        Error::Nonsmooth(msg.into())
    }
}
