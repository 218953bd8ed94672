#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use termscape_core::linalg::{norm, Matrix};
use termscape_core::TermVector;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    v.iter().map(|x| x / n).collect()
}

pub fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| gaussian(rng, d)).collect()
}

pub fn matrix(rows: &[Vec<f64>]) -> Matrix {
    Matrix::from_rows(rows).expect("rectangular rows")
}

pub fn term_vectors(rows: &[Vec<f64>]) -> Vec<TermVector> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| TermVector {
            term_id: format!("t{i}"),
            term: format!("term {i:03}"),
            concept_label: None,
            vector: r.clone(),
            normalized: false,
        })
        .collect()
}

/// `blobs` isotropic Gaussian clusters of `per` points around orthogonal unit
/// axes. Returns rows and the blob index of each row.
pub fn axis_blobs(seed: u64, blobs: usize, per: usize, d: usize, sigma: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut r = rng(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for b in 0..blobs {
        for _ in 0..per {
            let mut v: Vec<f64> = (0..d).map(|_| sigma * r.sample::<f64, _>(StandardNormal)).collect();
            v[b] += 1.0;
            rows.push(v);
            labels.push(b);
        }
    }
    (rows, labels)
}

/// Plain double-loop cosine.
pub fn brute_cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut ab = 0.0;
    let mut aa = 0.0;
    let mut bb = 0.0;
    for i in 0..a.len() {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    (ab / (aa.sqrt() * bb.sqrt())).clamp(-1.0, 1.0)
}

/// Minimum of `Σ_B (|B| - ‖Σ_{x∈B} x‖)` over all partitions of the unit rows
/// into at most `k` blocks, by restricted-growth-string enumeration.
pub fn optimal_partition_objective(points: &[Vec<f64>], k: usize) -> f64 {
    let n = points.len();
    let d = points[0].len();
    let mut best = f64::INFINITY;
    let mut labels = vec![0usize; n];
    fn rec(i: usize, used: usize, k: usize, labels: &mut Vec<usize>, points: &[Vec<f64>], d: usize, best: &mut f64) {
        let n = points.len();
        if i == n {
            let mut sums = vec![vec![0.0; d]; used];
            let mut sizes = vec![0usize; used];
            for (p, &l) in points.iter().zip(labels.iter()) {
                sizes[l] += 1;
                for (s, v) in sums[l].iter_mut().zip(p) {
                    *s += v;
                }
            }
            let obj: f64 =
                sums.iter().zip(&sizes).map(|(s, &c)| c as f64 - s.iter().map(|v| v * v).sum::<f64>().sqrt()).sum();
            if obj < *best {
                *best = obj;
            }
            return;
        }
        let limit = (used + 1).min(k);
        for l in 0..limit {
            labels[i] = l;
            rec(i + 1, used.max(l + 1), k, labels, points, d, best);
        }
    }
    rec(0, 0, k, &mut labels, points, d, &mut best);
    best
}
