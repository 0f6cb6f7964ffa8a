use thiserror::Error;

/// Failures that stop an experiment before it can produce a report.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("run diverged; last good time t = {last_good_time}")]
    Diverged { last_good_time: f64 },

    #[error("numerical core: {0}")]
    Core(fdwave_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serialize(String),
}

impl HarnessError {
    /// Process exit code: 2 for configuration errors, 3 for divergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Core(fdwave_core::Error::InvalidParameter { .. } | fdwave_core::Error::InvalidDomain(_)) => 2,
            HarnessError::Diverged { .. } => 3,
            _ => 1,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(msg.into())
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<fdwave_core::Error> for HarnessError {
    fn from(e: fdwave_core::Error) -> Self {
        match e {
            fdwave_core::Error::Diverged { last_good_time } => HarnessError::Diverged { last_good_time },
            other => HarnessError::Core(other),
        }
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Serialize(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
