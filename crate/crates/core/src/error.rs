use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("node id {id} out of range for {n} nodes")]
    NodeOutOfRange { id: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("empty node subset")]
    EmptySubset,
    #[error("duplicate node {0} in subset")]
    DuplicateNode(usize),
    #[error("graph has no edges")]
    NoEdges,
    #[error("label {label} out of range for {count} labels")]
    LabelOutOfRange { label: usize, count: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("requested {k} clusters for {n} items")]
    TooManyClusters { k: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid block model: {0}")]
    InvalidModel(String),
    #[error("invalid degree law: {0}")]
    InvalidDegreeLaw(String),
    #[error("average connection probability is zero")]
    ZeroAverageProbability,
    #[error("no block matrix satisfying the grouping condition after {0} draws")]
    ConditionNotMet(usize),
    #[error("eigensolver did not converge after {0} restarts")]
    NoConvergence(usize),
    #[error("spectral embedding is identically zero")]
    DegenerateEmbedding,
    #[error("leading eigenvector vanishes on {zeros} of {n} nodes")]
    DegenerateLeadingVector { zeros: usize, n: usize },
    #[error("variational EM left an empty cluster for K = {0} after restarts")]
    ClusterCollapse(usize),
    #[error("degenerate truth: AUC needs at least one positive and one negative")]
    DegenerateTruth,
    #[error("exhaustive oracle limited to {max} nodes, got {n}")]
    OracleTooLarge { n: usize, max: usize },
    #[error("malformed merge list at line {line}: {msg}")]
    MalformedMergeList { line: usize, msg: String },
}

pub type Result<T> = core::result::Result<T, Error>;
