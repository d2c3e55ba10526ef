use std::io;

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: u64, n: usize },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("residual component of vertex {vertex} exceeds cap {cap} (reached {reached})")]
    ComponentCap {
        vertex: u32,
        cap: usize,
        reached: usize,
    },

    #[error("ball of radius {radius} around vertex {vertex} needs an estimated {estimate} reveals, budget is {budget}")]
    BallBudget {
        vertex: u32,
        radius: u32,
        estimate: u128,
        budget: u128,
    },

    #[error("internal simulation error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors caused by the caller's input rather than by a failed run.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Input(_)
                | Error::VertexOutOfRange { .. }
                | Error::Parse { .. }
                | Error::Params(_)
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}
