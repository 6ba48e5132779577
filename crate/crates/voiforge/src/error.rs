use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, VfError>;

#[derive(Debug, thiserror::Error)]
pub enum VfError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] voiforge_core::Error),
}

impl VfError {
    /// Process exit code: 2 for configuration problems, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            VfError::Config(_) => 2,
            _ => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        VfError::Io { path: path.into(), source }
    }
}

impl From<csv::Error> for VfError {
    fn from(e: csv::Error) -> Self {
        VfError::Data(e.to_string())
    }
}
