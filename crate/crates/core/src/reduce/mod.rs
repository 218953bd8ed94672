//! Projection of term vectors to two dimensions.
//!
//! [`pca`] is the linear baseline. UMAP is assembled from its stages:
//! [`knn`] (exact neighbors), [`fuzzy`] (smooth-kNN calibration and fuzzy
//! union), [`curve`] (the low-dimensional membership curve) and [`umap`]
//! (spectral initialization and the SGD layout). [`sweep`] runs UMAP over a
//! grid of `(n_neighbors, min_dist)` pairs.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod curve;
pub mod fuzzy;
pub mod knn;
pub mod pca;
pub mod sweep;
pub mod umap;

pub use curve::{fit_ab, CurveFit};
pub use fuzzy::{fuzzy_union, smooth_knn_calibrate, Calibration, FuzzyGraph};
pub use knn::{knn_graph, KnnGraph, Metric};
pub use pca::{pca_fit_transform, PcaFit};
pub use sweep::{sweep, SweepRun, DEFAULT_MIN_DIST, DEFAULT_N_NEIGHBORS};
pub use umap::{umap_embed, UmapEmbedding};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReduceError {
    #[error("need more than {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(&'static str),
    #[error("all rows are identical")]
    DegenerateInput,
    #[error("zero vector at row {0} under the cosine metric")]
    ZeroVector(usize),
    #[error("non-finite value in input")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMethod {
    Spectral,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UmapParams {
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub n_epochs: usize,
    pub negative_sample_rate: usize,
    pub initial_learning_rate: f64,
    pub seed: u64,
    pub metric: Metric,
    pub init: InitMethod,
}

impl Default for UmapParams {
    fn default() -> Self {
        Self {
            n_neighbors: 15,
            min_dist: 0.1,
            n_epochs: 500,
            negative_sample_rate: 5,
            initial_learning_rate: 1.0,
            seed: 42,
            metric: Metric::Cosine,
            init: InitMethod::Spectral,
        }
    }
}

impl UmapParams {
    pub fn validate(&self, n_points: usize) -> Result<(), ReduceError> {
        if self.n_neighbors < 2 {
            return Err(ReduceError::InvalidParams("n_neighbors must be at least 2"));
        }
        if !(self.min_dist > 0.0 && self.min_dist <= 1.0) {
            return Err(ReduceError::InvalidParams("min_dist must lie in (0, 1]"));
        }
        if !(self.initial_learning_rate > 0.0) || !self.initial_learning_rate.is_finite() {
            return Err(ReduceError::InvalidParams("initial_learning_rate must be positive"));
        }
        if n_points <= self.n_neighbors {
            return Err(ReduceError::TooFewPoints { need: self.n_neighbors, got: n_points });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "produced_by", rename_all = "lowercase")]
pub enum ProjectionSource {
    Umap {
        params: UmapParams,
        /// Initialization actually used (spectral falls back to random).
        init_used: InitMethod,
        a: f64,
        b: f64,
    },
    Pca {
        explained_variance_ratio: Vec<f64>,
    },
}

/// Per-term 2-D coordinates with the parameters that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection2D {
    pub ids: Vec<String>,
    pub coords: Vec<[f64; 2]>,
    pub source: ProjectionSource,
}

impl Projection2D {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

pub(crate) fn check_finite(x: &crate::linalg::Matrix) -> Result<(), ReduceError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(ReduceError::NonFinite)
    }
}
