//! Privacy-preserving perturbation and clustering of tabular data streams.
//!
//! Sensitive numeric attributes are multiplied by a per-tuple value (the mean
//! z-score of the tuple's numeric features). The original and perturbed
//! streams are clustered window by window with k-means, and the two
//! clusterings are compared through a Cluster Membership Matrix
//! (accuracy / misclassification) and F1-based precision and recall against
//! the class labels.
//!
//! The numeric core is generic over [`Scalar`]; `f64` and `f32` aliases are
//! provided below.

pub mod cli;
pub mod cluster;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod perturb;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod schema;
pub mod stats;

pub use error::{Error, Result};
pub use pipeline::{run_pipeline, run_stream, PipelineConfig, StreamSettings};
pub use report::{emit_report, RunReport, WindowReport};
pub use scalar::Scalar;
pub use schema::{AttributeDescriptor, Instance, Role, Schema, Value};

pub type Instance64 = schema::Instance<f64>;
pub type Instance32 = schema::Instance<f32>;
pub type RunningStats64 = stats::RunningStats<f64>;
pub type RunningStats32 = stats::RunningStats<f32>;
pub type StatsTable64 = stats::StatsTable<f64>;
pub type StatsTable32 = stats::StatsTable<f32>;
pub type TupleValueRecord64 = perturb::TupleValueRecord<f64>;
pub type TupleValueRecord32 = perturb::TupleValueRecord<f32>;
pub type KMeansModel64 = cluster::KMeansModel<f64>;
pub type KMeansModel32 = cluster::KMeansModel<f32>;
