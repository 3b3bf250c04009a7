//! Characterization of communities in dynamic attributed networks by
//! emerging sequential patterns.
//!
//! The pipeline detects communities on the aggregated graph, computes
//! per-slice topological measures, encodes every node as a sequence of
//! discretized itemsets, mines closed patterns per community and finally
//! selects a small set of representative patterns plus the deviant nodes
//! they leave uncovered.

pub mod community;
pub mod config;
pub mod error;
pub mod ids;
pub mod measures;
pub mod mining;
pub mod network;
pub mod pipeline;
pub mod selection;
pub mod seqdb;
pub mod synthetic;

pub use error::{Error, Result};
pub use ids::{CommunityId, DescriptorId, NodeId, SliceIndex};
