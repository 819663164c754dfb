//! Error type shared across the crate.

use std::fmt;

/// Errors produced by graph I/O, metric evaluation, the hiding environment,
/// and the experiment harness.
#[derive(Debug)]
pub enum Error {
    /// Malformed edge-list input. Carries the 1-based line number.
    Parse { line: usize, message: String },
    /// An edge toggle that is inconsistent with the current graph, or an
    /// action outside the feasible set.
    InvalidAction(String),
    /// An operation was applied to a finished episode.
    TerminalState,
    /// Operands defined over different node sets.
    DimensionMismatch { left: usize, right: usize },
    /// A metric is undefined for the given input (e.g. modularity of an
    /// empty graph).
    UndefinedMetric(String),
    /// The experiment protocol cannot proceed (e.g. a single-community
    /// partition has no cross-community targets).
    Protocol(String),
    /// The policy was asked to act with no feasible action available.
    NoAction,
    /// Training produced a non-finite loss or parameter.
    Diverged(String),
    /// A checkpoint could not be read or does not match this version.
    Checkpoint(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            Error::InvalidAction(msg) => write!(f, "invalid action: {msg}"),
            Error::TerminalState => write!(f, "episode is already finished"),
            Error::DimensionMismatch { left, right } => {
                write!(f, "node-count mismatch: {left} vs {right}")
            }
            Error::UndefinedMetric(msg) => write!(f, "undefined metric: {msg}"),
            Error::Protocol(msg) => write!(f, "protocol error: {msg}"),
            Error::NoAction => write!(f, "no feasible action available"),
            Error::Diverged(msg) => write!(f, "training diverged: {msg}"),
            Error::Checkpoint(msg) => write!(f, "checkpoint error: {msg}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
