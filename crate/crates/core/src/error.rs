use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Variants follow the pipeline stages: ingestion (`Parse`, `Schema`,
/// `Consistency`), graph algorithms, mining and selection.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("slice index {index} out of range (network has {slices} slices)")]
    SliceIndex { index: usize, slices: usize },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("partition does not match graph: {0}")]
    PartitionMismatch(String),

    #[error("unknown node {0}")]
    UnknownNode(usize),

    #[error("node {0} has no community")]
    UnassignedNode(usize),

    #[error("community is empty")]
    EmptyCommunity,

    #[error("complement of the community is empty")]
    EmptyComplement,

    #[error("community {community} has {size} nodes, below the minimum of {minimum}")]
    CommunityTooSmall {
        community: u32,
        size: usize,
        minimum: usize,
    },

    #[error("minimum support must lie in (0, 1], got {0}")]
    InvalidSupport(String),

    #[error("pattern limit exceeded for community {community}: more than {limit} patterns")]
    PatternLimit { community: u32, limit: usize },

    #[error("database too large for exhaustive enumeration: {0}")]
    OracleTooLarge(String),

    #[error("no patterns to select from")]
    NoPatterns,

    #[error("Jaccard distance undefined for two empty sets")]
    BothEmpty,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }
}
