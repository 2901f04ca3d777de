//! Errors of the front end and their process exit codes.

use std::io::Write;
use std::path::{Path, PathBuf};

/// Exit codes: 0 success, 1 missing input file, 2 invalid input, 3 solver or
/// optimizer non-convergence.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{}: file not found", path.display())]
    NotFound { path: PathBuf },

    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Convergence(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::NotFound { .. } | AppError::Io { .. } => 1,
            AppError::Validation(_) => 2,
            AppError::Convergence(_) => 3,
        }
    }

    pub fn validation(msg: impl Into<String>) -> AppError {
        AppError::Validation(msg.into())
    }

    /// Prefixes the message with where the problem was found.
    pub fn context(self, what: impl std::fmt::Display) -> AppError {
        match self {
            AppError::Validation(m) => AppError::Validation(format!("{what}: {m}")),
            AppError::Convergence(m) => AppError::Convergence(format!("{what}: {m}")),
            other => other,
        }
    }
}

impl From<centipede_core::Error> for AppError {
    fn from(e: centipede_core::Error) -> Self {
        use centipede_core::Error as E;
        match e {
            E::Convergence { .. } | E::NotConverged { .. } => AppError::Convergence(e.to_string()),
            _ => AppError::Validation(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for AppError {
    fn from(e: serde_json::Error) -> Self {
        AppError::Validation(e.to_string())
    }
}

pub type AppResult<T> = Result<T, AppError>;

pub fn read_file(path: &Path) -> AppResult<String> {
    std::fs::read_to_string(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => AppError::NotFound { path: path.to_path_buf() },
        _ => AppError::Io { context: format!("reading {}", path.display()), source },
    })
}

/// Writes to `path`, or to standard output when no path is given.
pub fn write_output(path: Option<&Path>, contents: &[u8]) -> AppResult<()> {
    let result = match path {
        Some(p) => std::fs::write(p, contents),
        None => std::io::stdout().lock().write_all(contents),
    };
    result.map_err(|source| AppError::Io {
        context: format!("writing {}", path.map_or("standard output".into(), |p| p.display().to_string())),
        source,
    })
}
