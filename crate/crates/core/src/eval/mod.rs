//! Clustering fidelity and quality measures.

mod cmm;
mod contingency;
mod matching;

pub use cmm::{build_cmm, cmm_accuracy, misclassification, Cmm};
pub use contingency::{contingency, precision_measure, recall_measure, ContingencyTable};
pub use matching::{best_matching, ClusterMatching};
