//! Community detection on symmetrized network layers: weighted modularity,
//! Louvain optimization, resolution sweeps and cut-edge extraction.

mod graph;
mod louvain;
mod modularity;
mod sweep;

use thiserror::Error;

pub use graph::{quotient, symmetrize, UndirectedWeightedGraph};
pub use louvain::{louvain, Louvain, LouvainLevel, DEFAULT_SEED};
pub use modularity::{dense_labels, modularity, CommunityPartition};
pub use sweep::{
    default_sweep, inter_community_edges, log_spaced, modularity_curve, ModularityCurvePoint,
    DEFAULT_SWEEP,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CommunityError {
    #[error("duplicate node {0}")]
    DuplicateNode(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("invalid edge weight {0}")]
    InvalidWeight(f64),
    #[error("layer has no positive-weight edges")]
    NoPositiveEdges,
    #[error("partition does not cover: {0}")]
    Uncovered(String),
    #[error("resolution must be positive and finite, got {0}")]
    InvalidResolution(f64),
    #[error("invalid visit order: {0}")]
    InvalidOrder(String),
}
