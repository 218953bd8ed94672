//! UMAP: kNN graph → smooth-kNN calibration → fuzzy union → spectral (or
//! random) initialization → SGD layout with negative sampling.
//!
//! The layout is single-threaded and a pure function of `(X, params)`.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::curve::fit_ab;
use super::fuzzy::{directed_strengths, fuzzy_union, smooth_knn_calibrate, Calibration, FuzzyGraph};
use super::knn::knn_graph;
use super::{check_finite, InitMethod, Projection2D, ProjectionSource, ReduceError, UmapParams};
use crate::linalg::{leading_eigenpairs, norm, Matrix, SubspaceIteration};
use crate::seed::{derive_seed, rng_from_seed};

pub const INIT_SCALE: f64 = 10.0;
pub const GRADIENT_CLIP: f64 = 4.0;
pub const SPECTRAL_MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct UmapEmbedding {
    pub coords: Vec<[f64; 2]>,
    pub init_used: InitMethod,
    pub a: f64,
    pub b: f64,
    pub graph: FuzzyGraph,
    pub calibrations: Vec<Calibration>,
}

impl UmapEmbedding {
    pub fn flagged_rows(&self) -> usize {
        self.calibrations.iter().filter(|c| c.flagged).count()
    }
}

pub fn umap_embed(x: &Matrix, params: &UmapParams) -> Result<UmapEmbedding, ReduceError> {
    let n = x.nrows();
    params.validate(n)?;
    check_finite(x)?;

    let knn = knn_graph(x, params.n_neighbors, params.metric)?;
    let calibrations: Vec<Calibration> = (0..n).map(|i| smooth_knn_calibrate(knn.row_distances(i))).collect();
    let graph = fuzzy_union(n, &directed_strengths(&knn, &calibrations));
    let curve = fit_ab(params.min_dist);

    let (mut coords, init_used) = match params.init {
        InitMethod::Spectral => match spectral_layout(&graph, derive_seed(params.seed, 0x5eed)) {
            Some(c) => (c, InitMethod::Spectral),
            None => (random_layout(n, params.seed), InitMethod::Random),
        },
        InitMethod::Random => (random_layout(n, params.seed), InitMethod::Random),
    };

    optimize_layout(&mut coords, &graph, curve.a, curve.b, params);
    if coords.iter().any(|c| !c[0].is_finite() || !c[1].is_finite()) {
        return Err(ReduceError::NonFinite);
    }
    Ok(UmapEmbedding { coords, init_used, a: curve.a, b: curve.b, graph, calibrations })
}

/// Runs [`umap_embed`] and attaches term ids.
pub fn project(ids: Vec<String>, x: &Matrix, params: &UmapParams) -> Result<Projection2D, ReduceError> {
    let e = umap_embed(x, params)?;
    Ok(Projection2D {
        ids,
        coords: e.coords,
        source: ProjectionSource::Umap { params: *params, init_used: e.init_used, a: e.a, b: e.b },
    })
}

fn random_layout(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| [rng.random_range(-INIT_SCALE..INIT_SCALE), rng.random_range(-INIT_SCALE..INIT_SCALE)]).collect()
}

/// Eigenvectors 2 and 3 of the symmetric normalized Laplacian
/// `I - D^-1/2 W D^-1/2`, scaled so the largest coordinate magnitude is 10.
///
/// These are the leading eigenvectors of `(I + D^-1/2 W D^-1/2) / 2` after
/// deflating the known top vector `D^1/2 1`. `None` if the eigensolve does
/// not converge.
pub fn spectral_layout(graph: &FuzzyGraph, seed: u64) -> Option<Vec<[f64; 2]>> {
    let n = graph.n;
    if n < 3 {
        return None;
    }
    let degrees = graph.degrees();
    if degrees.iter().any(|&d| !(d > 0.0)) {
        return None;
    }
    let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / libm::sqrt(*d)).collect();
    let mut top: Vec<f64> = degrees.iter().map(|d| libm::sqrt(*d)).collect();
    let tn = norm(&top);
    top.iter_mut().for_each(|v| *v /= tn);

    let apply = |v: &[f64], out: &mut [f64]| {
        for i in 0..n {
            let s: f64 = graph.row(i).map(|(j, w)| w * inv_sqrt[j] * v[j]).sum();
            out[i] = 0.5 * (v[i] + inv_sqrt[i] * s);
        }
    };
    let pairs = leading_eigenpairs(
        apply,
        n,
        2,
        &[top],
        SubspaceIteration { block: (n - 1).min(6), max_iters: SPECTRAL_MAX_ITERS, tol: 1e-9, seed },
    );
    if !pairs.converged || pairs.vectors.len() < 2 {
        return None;
    }
    let max_abs = pairs.vectors.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(max_abs > 0.0) {
        return None;
    }
    let scale = INIT_SCALE / max_abs;
    Some((0..n).map(|i| [pairs.vectors[0][i] * scale, pairs.vectors[1][i] * scale]).collect())
}

#[inline]
fn clip(v: f64) -> f64 {
    v.clamp(-GRADIENT_CLIP, GRADIENT_CLIP)
}

/// Edge `(i, j, s)` fires on epochs that are multiples of
/// `max(1, round(max_s / s))`; each firing is one attractive step followed by
/// `negative_sample_rate` repulsive steps against uniform random vertices.
fn optimize_layout(coords: &mut [[f64; 2]], graph: &FuzzyGraph, a: f64, b: f64, params: &UmapParams) {
    let n = coords.len();
    let max_s = graph.values.iter().copied().fold(0.0_f64, f64::max);
    if !(max_s > 0.0) || params.n_epochs == 0 {
        return;
    }
    let mut edges: Vec<(usize, usize, usize)> = Vec::with_capacity(graph.nnz());
    for i in 0..n {
        for (j, s) in graph.row(i) {
            let period = libm::round(max_s / s).max(1.0);
            if period <= params.n_epochs as f64 {
                edges.push((i, j, period as usize));
            }
        }
    }

    let mut rng = rng_from_seed(params.seed);
    let total = params.n_epochs as f64;
    for epoch in 0..params.n_epochs {
        let lr = params.initial_learning_rate * (1.0 - epoch as f64 / total);
        for &(i, j, period) in &edges {
            if epoch % period != 0 {
                continue;
            }
            let (yi, yj) = (coords[i], coords[j]);
            let delta = [yi[0] - yj[0], yi[1] - yj[1]];
            let dist2 = delta[0] * delta[0] + delta[1] * delta[1];
            if dist2 > 0.0 {
                let coeff = -2.0 * a * b * libm::pow(dist2, b - 1.0) / (a * libm::pow(dist2, b) + 1.0);
                for d in 0..2 {
                    let g = clip(coeff * delta[d]) * lr;
                    coords[i][d] += g;
                    coords[j][d] -= g;
                }
            }

            for _ in 0..params.negative_sample_rate {
                let k = rng.random_range(0..n);
                if k == i {
                    continue;
                }
                let (yi, yk) = (coords[i], coords[k]);
                let delta = [yi[0] - yk[0], yi[1] - yk[1]];
                let dist2 = delta[0] * delta[0] + delta[1] * delta[1];
                let coeff =
                    if dist2 > 0.0 { 2.0 * b / ((0.001 + dist2) * (a * libm::pow(dist2, b) + 1.0)) } else { 0.0 };
                for d in 0..2 {
                    let g = if coeff > 0.0 { clip(coeff * delta[d]) } else { GRADIENT_CLIP };
                    coords[i][d] += g * lr;
                }
            }
        }
    }
}
