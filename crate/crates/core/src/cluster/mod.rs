//! Windowed k-means clustering of a stream.

mod kmeans;
mod window;

pub use kmeans::{kmeans_assign, kmeans_fit, kmeans_fit_traced, Assignment, KMeansModel, KMeansParams};
pub use window::{feature_matrix, window_partition, zscore_columns, Window};
