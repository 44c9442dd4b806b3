use std::fmt;

use crate::solver::SolveTrace;

/// Location of a grid node, used in diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeRef {
    /// Time level, `0..=nt+1`.
    pub level: usize,
    /// Lexicographic spatial index.
    pub spatial: usize,
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(level {}, spatial {})", self.level, self.spatial)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("input error: {0}")]
    Input(String),

    /// A pointwise operation was applied outside its domain, e.g. a log
    /// residual at a jet that is not strictly admissible.
    #[error("domain error: {reason} (margin {margin:e})")]
    Domain { reason: String, margin: f64 },

    /// Same as [`Error::Domain`], but attributed to a grid node.
    #[error("domain error at node {node}: {reason} (margin {margin:e})")]
    NodeDomain {
        node: NodeRef,
        reason: String,
        margin: f64,
    },

    #[error("initialization failed at node {node}: {reason}")]
    Initialization { node: NodeRef, reason: String },

    #[error("solver failure: {reason}")]
    Solver {
        reason: String,
        trace: Box<SolveTrace>,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
