//! Clustering by k-means, GA-clustering and their multi-sampling refined
//! variants (improved k-means and improved genetic k-means), plus the dataset
//! pipeline and a seeded benchmark harness.

pub mod bench;
pub mod dataset;
pub mod error;
pub mod gaclust;
pub mod kmeans;
pub mod matrix;
pub mod metric;
pub mod refine;
pub mod synth;

pub use dataset::{CsvOptions, Dataset, Delimiter, PcaModel};
pub use error::{ClusterError, Result};
pub use gaclust::{Chromosome, GaParams};
pub use kmeans::{KmeansParams, Tolerance};
pub use matrix::Matrix;
pub use metric::{Assignment, ClusterModel, MetricMode};
pub use refine::{InnerAlgorithm, RefineParams};
