use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {message}")]
    Config { field: Option<String>, message: String },

    #[error(transparent)]
    Model(#[from] budyko::Error),

    #[error("{operation}: {message}")]
    Numerical { operation: &'static str, message: String },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn config(field: Option<&str>, message: impl Into<String>) -> Self {
        CliError::Config { field: field.map(str::to_owned), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Model(e) if e.is_config() => 2,
            CliError::Model(_) | CliError::Numerical { .. } => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        let kind = match self.exit_code() {
            2 => "config",
            3 => "numerical",
            _ => "io",
        };
        let (module, operation, field) = match self {
            CliError::Config { field, .. } => (None, None, field.clone()),
            CliError::Model(e) => {
                let field = match e {
                    budyko::Error::InvalidParameter { field, .. } => Some(field.to_string()),
                    _ => None,
                };
                (Some(e.module()), Some(e.operation()), field)
            }
            CliError::Numerical { operation, .. } => (Some("cli"), Some(*operation), None),
            CliError::Io { .. } => (None, None, None),
        };
        ErrorRecord {
            status: "error",
            kind,
            exit_code: self.exit_code(),
            module,
            operation,
            field,
            message: self.to_string(),
        }
    }
}

/// Machine-readable failure report written to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub status: &'static str,
    pub kind: &'static str,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub module: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operation: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}
