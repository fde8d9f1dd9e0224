use thiserror::Error;

use crate::bigraph::Part;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge ({delta}, {gamma}) out of range for a {n_delta}x{n_gamma} bipartite graph")]
    EdgeOutOfRange {
        delta: usize,
        gamma: usize,
        n_delta: usize,
        n_gamma: usize,
    },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("weight must be nonnegative, got {0}")]
    NegativeWeight(f64),
    #[error("invalid weight mask: {0}")]
    InvalidMask(String),
    #[error("prior pair ({0}, {1}) spans two parts; cross-part knowledge belongs in the edge set")]
    CrossPartPrior(usize, usize),
    #[error("prior pair ({0}, {1}) is listed as both existence and absence")]
    ConflictingPrior(usize, usize),
    #[error("prior pair ({0}, {0}) is a self-pair")]
    SelfPrior(usize),
    #[error("prior node {0} out of range")]
    PriorOutOfRange(usize),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("column {column} of the {factor} factor is identically zero")]
    DegenerateColumn { factor: &'static str, column: usize },
    #[error("membership row {0} vanished before normalization")]
    ZeroRow(usize),
    #[error("all {restarts} restarts failed; last error: {last}")]
    AllRestartsFailed { restarts: usize, last: Box<Error> },
    #[error("community {0} has no members")]
    EmptyCommunity(usize),
    #[error("community {alpha} lies entirely in the {part:?} part")]
    OneSidedCommunity { alpha: usize, part: Part },
    #[error("label vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("partition is empty")]
    EmptyPartition,
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("no records survive filtering")]
    EmptyResult,
}
