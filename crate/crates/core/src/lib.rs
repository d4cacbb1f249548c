//! Node clustering and classification with graph encoder embedding (GEE),
//! a skip-connected two-layer GCN, and GCNs warm-started from GEE.
//!
//! - [`graph`]: CSR graphs, the normalised propagation operator, modularity.
//! - [`synth`]: SBM and degree-corrected SBM generators.
//! - [`gee`]: supervised and unsupervised encoder embedding.
//! - [`cluster`]: k-means and LDA heads.
//! - [`gcn`]: the network, DMoN and cross-entropy losses, Adam, training.
//! - [`pipelines`]: GEE / GNN / GG / GG-C and the split protocol.
//! - [`metrics`]: ARI and accuracy.
//! - [`experiment`]: dataset loading, experiment configs, sweeps and reports.

pub mod cluster;
pub mod error;
pub mod experiment;
pub mod gcn;
pub mod gee;
pub mod graph;
pub mod metrics;
pub mod pipelines;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use gee::Embedding;
pub use graph::{Graph, LabelVector, NormalizedAdjacency};
pub use pipelines::{classify, cluster, split_nodes, Method, MethodConfig, MethodResult, SplitMasks, SplitRatio};
