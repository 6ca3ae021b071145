use std::path::PathBuf;

use thiserror::Error;

use crate::config::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", format_violations(.0))]
    Config(Vec<Violation>),

    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite field after step from t = {last_good_t}")]
    BlowUp { last_good_t: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("malformed input {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("fit error: {0}")]
    Fit(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv { path: path.into(), source }
    }

    /// Process exit status used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::Incompatible(_) => 2,
            Error::BlowUp { .. } => 3,
            Error::Io { .. } | Error::Csv { .. } | Error::Format { .. } => 4,
            Error::Domain(_) | Error::Fit(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
