use std::path::PathBuf;

/// Crate-wide error type. Variants are grouped roughly by the layer that
/// raises them (ingestion, diffusion, estimation, policies, harness).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed line: {msg}")]
    ParseLine {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("empty graph: input contains no nodes")]
    EmptyGraph,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("node id {0} out of range")]
    UnknownNode(usize),
    #[error("node {0} was already selected as a seed")]
    DuplicateSeed(usize),
    #[error("simulation count must be at least 1")]
    ZeroSimulations,
    #[error("residual graph is empty")]
    EmptyResidual,
    #[error("sample-size bound requires a positive tail mass (every node costs more than the budget)")]
    NonpositiveTailMass,
    #[error("budget must be positive")]
    NonpositiveBudget,
    #[error("enumeration over {edges} edge states exceeds the limit of {max}")]
    EnumerationTooLarge { edges: usize, max: usize },
    #[error("exact optimum supports at most {max} nodes, got {nodes}")]
    TooManyNodes { nodes: usize, max: usize },
    #[error("unknown policy name '{0}'")]
    UnknownPolicy(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}:{line}: malformed csv: {msg}")]
    Csv {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
