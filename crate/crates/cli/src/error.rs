use std::path::PathBuf;

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config key `{key}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        key: String,
        line: Option<usize>,
        message: String,
    },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] magnon_core::Error),
}

impl CliError {
    pub fn config(key: &str, line: Option<usize>, message: impl Into<String>) -> Self {
        Self::Config {
            key: key.to_string(),
            line,
            message: message.into(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config { .. } => "config",
            Self::Io { .. } => "io",
            Self::Usage(_) => "usage",
            Self::Core(_) => "computation",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } | Self::Usage(_) => 2,
            Self::Io { .. } | Self::Core(_) => 1,
        }
    }

    /// Machine-readable form written to stderr on failure.
    pub fn to_json(&self, subcommand: Option<&str>) -> String {
        let mut v = json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "subcommand": subcommand,
            }
        });
        if let Self::Config { key, line, .. } = self {
            v["error"]["key"] = json!(key);
            v["error"]["line"] = json!(line);
        }
        v.to_string()
    }
}
