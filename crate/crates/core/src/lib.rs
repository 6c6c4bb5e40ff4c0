//! Link prediction laboratory.
//!
//! Generates Erdős–Rényi, Watts–Strogatz and Barabási–Albert graphs, prunes a
//! fraction of their edges, segments the observed graph with k-means over
//! adjacency rows, ranks intra-cluster candidates with query-independent
//! vertex scores (degree, transitivity, HITS authority) and reports
//! micro-averaged P@N / R@N together with information-gain feature analysis.

pub mod error;
pub mod evaluation;
pub mod features;
pub mod format;
pub mod generators;
pub mod graph;
pub mod pipeline;
pub mod prediction;
pub mod rng;
pub mod segmentation;

pub use error::{Error, Result};
pub use graph::{EdgeList, Graph};
