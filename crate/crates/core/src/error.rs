use thiserror::Error;

/// Errors raised across the crate. Each maps to one CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("constraint projection did not converge: {0}")]
    Constraint(String),
    #[error("map: {0}")]
    Map(String),
    #[error("fields: {0}")]
    Fields(String),
    #[error("tiling: {0}")]
    Tiling(String),
    #[error("solver aborted: {0}")]
    Solver(String),
    #[error("config: {0}")]
    Config(String),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 1 contract failure, 2 config error, 3 solver abort.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Solver(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
