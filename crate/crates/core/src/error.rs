use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("self-loop at line {line}")]
    SelfLoop { line: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// The input graph does not have the shape an operation requires
    /// (not a tree, not connected, ...).
    #[error("{0}")]
    Structure(String),

    #[error("no valid source placement after {attempts} attempts (k = {k}, tau = {tau})")]
    Placement { attempts: usize, k: usize, tau: u32 },

    #[error("generation failed at level {level}: {msg}")]
    Generation { level: usize, msg: String },

    #[error("infeasible delta interval ({low}, {high}): {msg}")]
    Infeasible { low: f64, high: f64, msg: String },

    #[error("refused: {0}")]
    Refused(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}

pub(crate) fn not_a_tree<T>() -> Result<T> {
    Err(Error::Structure("input is not a tree".into()))
}

pub(crate) fn not_connected<T>() -> Result<T> {
    Err(Error::Structure("input graph is not connected".into()))
}
