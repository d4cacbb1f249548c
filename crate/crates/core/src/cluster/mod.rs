//! Classical heads: Lloyd's k-means and linear discriminant analysis.

mod kmeans;
mod lda;

pub use kmeans::{kmeans, lloyd, KMeansResult, LloydRun};
pub use lda::{lda_fit, lda_predict, LdaModel, DEFAULT_SHRINKAGE};
