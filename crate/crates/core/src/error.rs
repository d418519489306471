use std::path::PathBuf;

use crate::graph::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("graph is at its capacity of {cap} nodes")]
    CapacityExceeded { cap: usize },

    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(NodeId),

    #[error("edge ({0}, {1}) already exists")]
    DuplicateEdge(NodeId, NodeId),

    #[error("edge weight must be positive and finite, got {0}")]
    NonPositiveWeight(f64),

    #[error("nodes with zero degree: {0:?}")]
    ZeroDegree(Vec<NodeId>),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("class index {class} out of range for {num_classes} classes")]
    ClassOutOfRange { class: usize, num_classes: usize },

    #[error("dense solve limited to {limit} nodes, graph has {n}")]
    TooLarge { n: usize, limit: usize },

    #[error("linear system is singular")]
    Singular,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph is empty")]
    EmptyGraph,

    #[error("node {0} has no neighbours")]
    IsolatedNode(NodeId),

    #[error("class {class} has {available} members, {requested} requested")]
    ClassTooSmall {
        class: usize,
        available: usize,
        requested: usize,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {err}")]
    Io { path: PathBuf, err: std::io::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
