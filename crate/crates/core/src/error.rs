use thiserror::Error;

/// Errors raised by the library and the command-line front end.
///
/// Each variant maps onto a distinct CLI exit code (see [`Error::exit_code`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Inputs are valid numbers but outside the asymptotic regime the
    /// procedure is defined for.
    #[error("regime error: {0}")]
    Regime(String),
    /// Malformed plan, flag combination or catalog name.
    #[error("usage error: {0}")]
    Usage(String),
    /// A model specification is internally inconsistent.
    #[error("model error: {0}")]
    Model(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Io(_) => 2,
            Error::Domain(_) | Error::Regime(_) | Error::Model(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Regime(_) => "regime",
            Error::Usage(_) => "usage",
            Error::Model(_) => "model",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
