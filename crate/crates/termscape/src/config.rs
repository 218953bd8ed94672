//! Optional JSON run configuration. Command-line flags take precedence over
//! file values, file values over built-in defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use termscape_core::reduce::{InitMethod, Metric};
use termscape_core::UmapParams;

use crate::error::Result;
use crate::files::load_json;
use crate::pipeline::ClusterSettings;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Concept index JSON written by `ingest`.
    pub corpus: Option<PathBuf>,
    pub tokens: Option<PathBuf>,
    pub store: Option<PathBuf>,
    pub projection: Option<PathBuf>,
    pub session: Option<PathBuf>,
    /// Directory for sweep, cluster and report outputs.
    pub reports: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UmapConfig {
    pub n_neighbors: Option<usize>,
    pub min_dist: Option<f64>,
    pub n_epochs: Option<usize>,
    pub negative_sample_rate: Option<usize>,
    pub initial_learning_rate: Option<f64>,
    pub metric: Option<Metric>,
    pub init: Option<InitMethod>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KMeansConfig {
    pub k: Option<usize>,
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Fallback for every step without its own seed.
    pub seed: Option<u64>,
    pub paths: PathsConfig,
    pub umap: UmapConfig,
    pub kmeans: KMeansConfig,
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => load_json(p),
            None => Ok(Self::default()),
        }
    }

    /// Overlays `flags` on the file's UMAP section.
    pub fn umap(&self, flags: &UmapConfig) -> UmapParams {
        let d = UmapParams::default();
        let f = &self.umap;
        UmapParams {
            n_neighbors: flags.n_neighbors.or(f.n_neighbors).unwrap_or(d.n_neighbors),
            min_dist: flags.min_dist.or(f.min_dist).unwrap_or(d.min_dist),
            n_epochs: flags.n_epochs.or(f.n_epochs).unwrap_or(d.n_epochs),
            negative_sample_rate: flags
                .negative_sample_rate
                .or(f.negative_sample_rate)
                .unwrap_or(d.negative_sample_rate),
            initial_learning_rate: flags
                .initial_learning_rate
                .or(f.initial_learning_rate)
                .unwrap_or(d.initial_learning_rate),
            seed: flags.seed.or(f.seed).or(self.seed).unwrap_or(DEFAULT_SEED),
            metric: flags.metric.or(f.metric).unwrap_or(d.metric),
            init: flags.init.or(f.init).unwrap_or(d.init),
        }
    }

    pub fn kmeans(&self, flags: &KMeansConfig) -> ClusterSettings {
        let d = ClusterSettings::default();
        let f = &self.kmeans;
        ClusterSettings {
            k: flags.k.or(f.k),
            seed: flags.seed.or(f.seed).or(self.seed).unwrap_or(DEFAULT_SEED),
            restarts: flags.restarts.or(f.restarts).unwrap_or(d.restarts),
            max_iters: flags.max_iters.or(f.max_iters).unwrap_or(d.max_iters),
            tol: flags.tol.or(f.tol).unwrap_or(d.tol),
        }
    }
}
