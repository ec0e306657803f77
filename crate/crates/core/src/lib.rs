//! Supply and demand analysis of bus networks.
//!
//! Bus lines and passenger traversals become one directed stop graph with two
//! weight layers ([`model`], [`ingest`]). The weight distributions of the layers
//! are compared ([`stats`]), each layer is partitioned by modularity
//! optimization ([`community`]), and the edges cut by each partition are scored
//! for overload and waste and traced back to the lines that run them
//! ([`diagnose`]). [`cli`] wires the stages into the `transit-balance` tool.
//!
//! The numeric modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which the command-line tool uses.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod community;
pub mod diagnose;
pub mod ingest;
pub mod model;
pub mod scalar;
pub mod stats;

pub use scalar::Scalar;

pub type PairedNetworkF64 = model::PairedNetwork<f64>;
pub type PairedNetworkF32 = model::PairedNetwork<f32>;
pub type GraphF64 = community::UndirectedWeightedGraph<f64>;
pub type GraphF32 = community::UndirectedWeightedGraph<f32>;
pub type PartitionF64 = community::CommunityPartition<f64>;
pub type BinnedDistributionF64 = stats::BinnedDistribution<f64>;
pub type PowerLawFitF64 = stats::PowerLawFit<f64>;
pub type AllometricFitF64 = stats::AllometricFit<f64>;
pub type DiagnosisRecordF64 = diagnose::DiagnosisRecord<f64>;
pub type BuiltNetworkF64 = ingest::BuiltNetwork<f64>;
