use radres_core::Error as CoreError;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if is_numerical(e) => 3,
            _ => 2,
        }
    }

    /// Machine-readable diagnostic written to stderr on failure.
    pub fn diagnostic(&self) -> serde_json::Value {
        let kind = match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } | CliError::Csv { .. } => "io",
            CliError::Core(e) => match e {
                CoreError::Pole(_) => "pole",
                CoreError::Domain(_) => "domain",
                CoreError::Invalid(_) => "invalid",
                CoreError::Swallowed(_) => "swallowed",
                CoreError::Horizon { .. } => "horizon",
                CoreError::Zipper { .. } => "zipper",
                CoreError::Numerical(_) => "numerical",
            },
        };
        let mut v = json!({ "error": kind, "message": self.to_string(), "exit_code": self.exit_code() });
        if let CliError::Core(CoreError::Zipper { vertex, .. }) = self {
            v["vertex"] = json!(vertex);
        }
        v
    }
}

fn is_numerical(e: &CoreError) -> bool {
    matches!(e, CoreError::Swallowed(_) | CoreError::Horizon { .. } | CoreError::Zipper { .. } | CoreError::Numerical(_) | CoreError::Pole(_))
}

pub type Result<T> = std::result::Result<T, CliError>;
