//! Crate-wide error type.
//!
//! Errors are split into user errors (bad input: files, config, column names,
//! parameter domains) and numerical errors (a computation that could not be
//! completed). The CLI maps the former to exit code 1 and the latter to exit
//! code 2.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {message}")]
    Csv { path: String, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("column `{column}` is not binary 0/1 (row {row} has {value})")]
    NotBinary {
        column: String,
        row: usize,
        value: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown copula code `{0}`")]
    UnknownCopulaCode(String),

    #[error("parameter {value} outside the domain of {family}")]
    InvalidParameter { family: String, value: f64 },

    #[error("root finder failed for {context}: u={u}, target={target}")]
    RootFind { context: String, u: f64, target: f64 },

    #[error("log-likelihood is not finite at row {row}")]
    NonFiniteLikelihood { row: usize },

    #[error("matrix is not positive definite: {context}")]
    NotPositiveDefinite { context: String },

    #[error("singular matrix: {context}")]
    Singular { context: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{0}")]
    Numerical(String),
}

impl Error {
    /// Exit code for the CLI: 1 for user errors, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::Csv { .. }
            | Error::Config(_)
            | Error::UnknownColumn(_)
            | Error::NotBinary { .. }
            | Error::InvalidArgument(_)
            | Error::UnknownCopulaCode(_)
            | Error::InvalidParameter { .. } => 1,
            Error::RootFind { .. }
            | Error::NonFiniteLikelihood { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::Singular { .. }
            | Error::Degenerate(_)
            | Error::Numerical(_) => 2,
        }
    }

    /// Short machine-readable kind tag used in the CLI's JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::Config(_) => "config",
            Error::UnknownColumn(_) => "unknown_column",
            Error::NotBinary { .. } => "not_binary",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::UnknownCopulaCode(_) => "unknown_copula_code",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::RootFind { .. } => "root_find",
            Error::NonFiniteLikelihood { .. } => "non_finite_likelihood",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::Singular { .. } => "singular",
            Error::Degenerate(_) => "degenerate",
            Error::Numerical(_) => "numerical",
        }
    }
}
