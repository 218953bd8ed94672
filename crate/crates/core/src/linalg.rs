//! Dense row-major matrices and the two symmetric eigensolvers used by the
//! reducers: cyclic Jacobi for small dense problems and block subspace
//! iteration with Rayleigh–Ritz extraction for the leading eigenpairs of a
//! large operator given only as a matrix-vector product.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::seed::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Builds a matrix from row-major data. Panics if the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self { rows, cols, data }
    }

    /// Builds a matrix from equal-length rows. Returns `None` on ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Option<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return None;
            }
            data.extend_from_slice(r);
        }
        Some(Self { rows: rows.len(), cols, data })
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Eigendecomposition of a small dense symmetric matrix by cyclic Jacobi
/// rotations.
///
/// `a` is `n x n` row-major. Returns eigenvalues in descending order and the
/// matching unit eigenvectors (one `Vec` per eigenvalue).
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            diag += m[i * n + i] * m[i * n + i];
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let vectors = order.iter().map(|&c| (0..n).map(|r| v[r * n + c]).collect()).collect();
    (values, vectors)
}

/// Modified Gram–Schmidt of `v` against each of `basis` (assumed orthonormal),
/// applied twice. Returns the remaining norm before normalization.
pub fn orthogonalize_against(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            axpy(-c, b, v);
        }
    }
    norm(v)
}

/// Settings for [`leading_eigenpairs`].
#[derive(Debug, Clone, Copy)]
pub struct SubspaceIteration {
    /// Block size; at least the number of requested pairs.
    pub block: usize,
    pub max_iters: usize,
    /// Convergence when every requested residual `|A x - θ x|` is at most
    /// `tol * max(|θ_0|, 1e-300)`.
    pub tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    pub max_residual: f64,
}

/// Leading `count` eigenpairs of a symmetric positive semi-definite operator
/// of dimension `dim`, restricted to the orthogonal complement of `deflate`
/// (orthonormal vectors, typically known eigenvectors).
pub fn leading_eigenpairs<F>(
    apply: F,
    dim: usize,
    count: usize,
    deflate: &[Vec<f64>],
    settings: SubspaceIteration,
) -> Eigenpairs
where
    F: Fn(&[f64], &mut [f64]),
{
    let available = dim.saturating_sub(deflate.len());
    let count = count.min(available);
    let block = settings.block.max(count).min(available);
    let mut rng = rng_from_seed(settings.seed);

    let fresh = |basis: &[Vec<f64>], rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        loop {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let mut against = deflate.to_vec();
            against.extend_from_slice(basis);
            let nv = orthogonalize_against(&mut v, &against);
            if nv > 1e-8 {
                v.iter_mut().for_each(|x| *x /= nv);
                return v;
            }
        }
    };

    let mut q: Vec<Vec<f64>> = Vec::with_capacity(block);
    for _ in 0..block {
        let v = fresh(&q, &mut rng);
        q.push(v);
    }

    let mut z = vec![vec![0.0; dim]; block];
    let mut best =
        Eigenpairs { values: Vec::new(), vectors: Vec::new(), iterations: 0, converged: block == 0, max_residual: 0.0 };
    if block == 0 {
        return best;
    }

    for it in 0..settings.max_iters.max(1) {
        for (qi, zi) in q.iter().zip(z.iter_mut()) {
            apply(qi, zi);
            orthogonalize_against(zi, deflate);
        }

        // Rayleigh–Ritz on span(q).
        let mut h = vec![0.0; block * block];
        for i in 0..block {
            for j in i..block {
                let hij = 0.5 * (dot(&q[i], &z[j]) + dot(&q[j], &z[i]));
                h[i * block + j] = hij;
                h[j * block + i] = hij;
            }
        }
        let (theta, s) = symmetric_eigen(&h, block);

        let mut ritz = Vec::with_capacity(count);
        let mut max_res: f64 = 0.0;
        for (t, sv) in theta.iter().zip(&s).take(count) {
            let mut x = vec![0.0; dim];
            let mut ax = vec![0.0; dim];
            for (c, (qj, zj)) in sv.iter().zip(q.iter().zip(&z)) {
                axpy(*c, qj, &mut x);
                axpy(*c, zj, &mut ax);
            }
            axpy(-t, &x, &mut ax);
            max_res = max_res.max(norm(&ax));
            ritz.push(x);
        }
        let scale = theta.first().map_or(0.0, |t| t.abs()).max(1e-300);
        best = Eigenpairs {
            values: theta[..count].to_vec(),
            vectors: ritz,
            iterations: it + 1,
            converged: max_res <= settings.tol * scale,
            max_residual: max_res,
        };
        if best.converged {
            return best;
        }

        // Next basis: orthonormalized A q, re-randomizing collapsed columns.
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(block);
        for zi in &z {
            let mut v = zi.clone();
            let before = norm(&v);
            let mut against = deflate.to_vec();
            against.extend_from_slice(&next);
            let after = orthogonalize_against(&mut v, &against);
            if after > 1e-10 * before.max(1e-300) && after > 1e-300 {
                v.iter_mut().for_each(|x| *x /= after);
                next.push(v);
            } else {
                let v = fresh(&next, &mut rng);
                next.push(v);
            }
        }
        q = next;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes_two_by_two() {
        let (vals, vecs) = symmetric_eigen(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((vals[0] - 3.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        let v = &vecs[0];
        assert!((v[0].abs() - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((v[0] - v[1]).abs() < 1e-14);
    }

    #[test]
    fn subspace_iteration_finds_top_of_diagonal_operator() {
        let diag = [5.0, 4.0, 1.0, 0.5, 0.25];
        let out = leading_eigenpairs(
            |x, y| {
                for i in 0..5 {
                    y[i] = diag[i] * x[i];
                }
            },
            5,
            2,
            &[],
            SubspaceIteration { block: 3, max_iters: 5000, tol: 1e-13, seed: 1 },
        );
        assert!(out.converged);
        assert!((out.values[0] - 5.0).abs() < 1e-12);
        assert!((out.values[1] - 4.0).abs() < 1e-12);
        assert!((out.vectors[0][0].abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn deflation_excludes_known_vector() {
        let diag = [5.0, 4.0, 1.0];
        let out = leading_eigenpairs(
            |x, y| {
                for i in 0..3 {
                    y[i] = diag[i] * x[i];
                }
            },
            3,
            1,
            &[vec![1.0, 0.0, 0.0]],
            SubspaceIteration { block: 2, max_iters: 5000, tol: 1e-12, seed: 3 },
        );
        assert!((out.values[0] - 4.0).abs() < 1e-10);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_none());
    }
}
