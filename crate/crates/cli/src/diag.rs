//! Harness errors and their structured stderr form.

use serde_json::json;

/// Exit status for configuration and usage problems.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for numeric or output failures.
pub const EXIT_RUNTIME: i32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{operation}: {key}: {message}")]
    Config { operation: &'static str, key: String, message: String },
    #[error("{module}::{operation}: {source}")]
    Numeric { module: &'static str, operation: &'static str, source: qtwm_core::Error },
    #[error("writing {path}: {message}")]
    Output { path: String, message: String },
}

pub type HarnessResult<T> = Result<T, HarnessError>;

impl HarnessError {
    pub fn config(operation: &'static str, key: impl Into<String>, message: impl ToString) -> Self {
        HarnessError::Config { operation, key: key.into(), message: message.to_string() }
    }

    pub fn output(path: &std::path::Path, err: impl ToString) -> Self {
        HarnessError::Output { path: path.display().to_string(), message: err.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        }
    }

    /// One-line JSON object describing the failure.
    pub fn diagnostic(&self) -> serde_json::Value {
        match self {
            HarnessError::Config { operation, key, message } => json!({
                "level": "error",
                "kind": "config",
                "module": "config",
                "operation": operation,
                "key": key,
                "message": message,
            }),
            HarnessError::Numeric { module, operation, source } => json!({
                "level": "error",
                "kind": "numeric",
                "module": module,
                "operation": operation,
                "key": serde_json::Value::Null,
                "message": source.to_string(),
            }),
            HarnessError::Output { path, message } => json!({
                "level": "error",
                "kind": "output",
                "module": "output",
                "operation": "write",
                "key": path,
                "message": message,
            }),
        }
    }
}

/// Attaches module context to a core error.
pub trait Context<T> {
    fn within(self, module: &'static str, operation: &'static str) -> HarnessResult<T>;
}

impl<T> Context<T> for qtwm_core::Result<T> {
    fn within(self, module: &'static str, operation: &'static str) -> HarnessResult<T> {
        self.map_err(|source| HarnessError::Numeric { module, operation, source })
    }
}
