use thiserror::Error;

/// Errors shared by every module of the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ground set of size {0} exceeds the 128-element limit")]
    GroundTooLarge(usize),

    #[error("element {element} lies outside the ground set [{n}]")]
    ElementOutOfRange { element: usize, n: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("member {member} is not a subset of the t-layer support")]
    SupportViolation { member: String },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
