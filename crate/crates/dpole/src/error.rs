use std::path::PathBuf;

/// Harness failures, grouped by the CLI exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("runtime error: {0}")]
    Runtime(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {}: {message}", path.display())]
    Format { path: PathBuf, message: String },
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

impl HarnessError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        HarnessError::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// 1 configuration, 2 runtime/numeric, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => 1,
            HarnessError::Runtime(_) => 2,
            HarnessError::Io { .. } | HarnessError::Format { .. } => 3,
        }
    }

    /// Attach a section prefix to errors coming out of the core crate.
    pub(crate) fn from_core(section: &str, err: dpole_core::Error) -> Self {
        match err {
            dpole_core::Error::Config { key, reason } => {
                HarnessError::config(format!("{section}.{key}"), reason)
            }
            other => HarnessError::Runtime(other.to_string()),
        }
    }
}
