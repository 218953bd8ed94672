//! Exact brute-force k-nearest-neighbor graph.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_finite, ReduceError};
use crate::linalg::{dot, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// `1 - cos(a, b)`, clamped to `[0, 2]`.
    Cosine,
    Euclidean,
}

impl Metric {
    fn prepare(self, x: &Matrix) -> Result<Vec<f64>, ReduceError> {
        match self {
            Metric::Euclidean => Ok(Vec::new()),
            Metric::Cosine => x
                .rows_iter()
                .enumerate()
                .map(|(i, r)| {
                    let n = libm::sqrt(dot(r, r));
                    if n > 0.0 {
                        Ok(n)
                    } else {
                        Err(ReduceError::ZeroVector(i))
                    }
                })
                .collect(),
        }
    }

    fn between(self, x: &Matrix, norms: &[f64], i: usize, j: usize) -> f64 {
        let (a, b) = (x.row(i), x.row(j));
        match self {
            Metric::Euclidean => libm::sqrt(a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>()),
            Metric::Cosine => 1.0 - (dot(a, b) / (norms[i] * norms[j])).clamp(-1.0, 1.0),
        }
    }
}

/// `n x k` neighbor ids and distances, rows ascending by distance then id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnGraph {
    pub k: usize,
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
}

impl KnnGraph {
    pub fn n(&self) -> usize {
        if self.k == 0 {
            0
        } else {
            self.indices.len() / self.k
        }
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.indices[i * self.k..(i + 1) * self.k]
    }

    pub fn row_distances(&self, i: usize) -> &[f64] {
        &self.distances[i * self.k..(i + 1) * self.k]
    }
}

/// Exact neighbors of every point, self excluded; ties go to the smaller id.
pub fn knn_graph(x: &Matrix, k: usize, metric: Metric) -> Result<KnnGraph, ReduceError> {
    let n = x.nrows();
    if k == 0 {
        return Err(ReduceError::InvalidParams("k must be positive"));
    }
    if k >= n {
        return Err(ReduceError::TooFewPoints { need: k, got: n });
    }
    check_finite(x)?;
    let norms = metric.prepare(x)?;

    let mut indices = Vec::with_capacity(n * k);
    let mut distances = Vec::with_capacity(n * k);
    // Bounded sorted buffer per row; candidates arrive in increasing id, so a
    // strict `<` comparison keeps the smaller id ahead on ties.
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for i in 0..n {
        best.clear();
        for j in (0..n).filter(|&j| j != i) {
            let d = metric.between(x, &norms, i, j);
            if best.len() == k && !(d < best[k - 1].0) {
                continue;
            }
            let pos = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(pos, (d, j));
            best.truncate(k);
        }
        for &(d, j) in &best {
            indices.push(j);
            distances.push(d);
        }
    }
    Ok(KnnGraph { k, indices, distances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn collinear_middle_point() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let g = knn_graph(&x, 1, Metric::Euclidean).unwrap();
        assert_eq!(g.neighbors(1), [0]);
        assert_eq!(g.row_distances(1), [1.0]);
        assert_eq!(g.neighbors(2), [1]);
    }

    #[test]
    fn duplicates_give_zero_distance_without_self_loop() {
        let x = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0], vec![5.0, 5.0]]).unwrap();
        let g = knn_graph(&x, 1, Metric::Euclidean).unwrap();
        assert_eq!(g.neighbors(0), [1]);
        assert_eq!(g.neighbors(1), [0]);
        assert_eq!(g.row_distances(0), [0.0]);
    }

    #[test]
    fn ties_break_to_smaller_index() {
        let x = Matrix::from_rows(&[vec![0.0], vec![-1.0], vec![1.0]]).unwrap();
        let g = knn_graph(&x, 2, Metric::Euclidean).unwrap();
        assert_eq!(g.neighbors(0), [1, 2]);
    }

    #[test]
    fn k_must_be_below_n() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert!(matches!(knn_graph(&x, 2, Metric::Euclidean), Err(ReduceError::TooFewPoints { .. })));
    }

    #[test]
    fn cosine_rejects_zero_rows() {
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(knn_graph(&x, 1, Metric::Cosine), Err(ReduceError::ZeroVector(0)));
    }
}
