//! Numerical core of the termscape concept-normalization workbench.
//!
//! The pipeline this crate implements, end to end:
//!
//! 1. [`corpus`] parses a mention corpus (sentence, surface term, gold concept
//!    label) and groups synonyms under their concept label.
//! 2. [`vecstore`] pools per-subword vectors into one vector per term by
//!    elementwise sum and L2-normalizes them.
//! 3. [`reduce`] projects term vectors to two dimensions (PCA baseline or UMAP
//!    built on an exact kNN graph).
//! 4. [`session`] records the human grouping and labeling decisions made on that
//!    projection as an append-only event log.
//! 5. [`cluster`] runs spherical k-means per group and elects the term closest
//!    to each centroid as the cluster's parent node.
//! 6. [`geometry`] and [`evaluate`] report within- versus cross-concept cosine
//!    similarity and clustering purity.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the CLI and the HTTP
//! service live in the `termscape` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cluster;
pub mod corpus;
pub mod evaluate;
pub mod geometry;
pub mod linalg;
pub mod reduce;
pub mod seed;
pub mod session;
pub mod synth;
pub mod vecstore;

pub use cluster::{ClusterModel, KMeansParams, ParentTree};
pub use corpus::{ConceptIndex, MentionRecord};
pub use geometry::{Histogram, SimilarityMatrix};
pub use linalg::Matrix;
pub use reduce::{Projection2D, UmapParams};
pub use session::AnnotationSession;
pub use vecstore::{TermVector, TokenEmbeddingRecord};
