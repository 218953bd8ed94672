//! UMAP over a grid of `(n_neighbors, min_dist)` pairs.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::umap::{umap_embed, UmapEmbedding};
use super::{ReduceError, UmapParams};
use crate::linalg::Matrix;
use crate::seed::mix64;

pub const DEFAULT_N_NEIGHBORS: [usize; 3] = [5, 15, 50];
pub const DEFAULT_MIN_DIST: [f64; 3] = [0.01, 0.1, 0.5];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub params: UmapParams,
    pub embedding: UmapEmbedding,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n_neighbors: usize,
    pub min_dist: f64,
}

/// `base ⊕ hash(n_neighbors, min_dist)`; equal pairs always get equal seeds.
pub fn pair_seed(base: u64, n_neighbors: usize, min_dist: f64) -> u64 {
    base ^ mix64(mix64(n_neighbors as u64) ^ min_dist.to_bits())
}

/// One run per Cartesian pair, `n_neighbors` outer, `min_dist` inner.
/// Everything except the two swept values and the seed comes from `template`.
pub fn sweep(
    x: &Matrix,
    n_neighbors: &[usize],
    min_dist: &[f64],
    template: &UmapParams,
) -> Result<Vec<SweepRun>, ReduceError> {
    if n_neighbors.is_empty() || min_dist.is_empty() {
        return Err(ReduceError::InvalidParams("sweep lists must be non-empty"));
    }
    let mut runs = Vec::with_capacity(n_neighbors.len() * min_dist.len());
    for &nn in n_neighbors {
        for &md in min_dist {
            let params =
                UmapParams { n_neighbors: nn, min_dist: md, seed: pair_seed(template.seed, nn, md), ..*template };
            let embedding = umap_embed(x, &params)?;
            runs.push(SweepRun { params, embedding });
        }
    }
    Ok(runs)
}
