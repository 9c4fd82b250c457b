use std::path::PathBuf;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("config: missing mandatory key `{0}`")]
    MissingKey(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("point lies outside element {element}")]
    PointOutside { element: usize },

    #[error("linear solver: {0}")]
    Solver(String),

    #[error("time step {step} failed: {msg}")]
    StepFailure { step: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
