//! Principal component analysis on the sample covariance.
//!
//! The covariance is never formed: the leading eigenpairs come from block
//! subspace iteration on `x -> Xcᵀ (Xc x) / (n - 1)`, with a few extra
//! columns of oversampling so convergence depends on the gap after the
//! requested components rather than between them.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{check_finite, Projection2D, ProjectionSource, ReduceError};
use crate::linalg::{dot, leading_eigenpairs, Matrix, SubspaceIteration};

const OVERSAMPLE: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaFit {
    /// `n x n_components`, the centered data times the components.
    pub projection: Matrix,
    /// One unit-norm `d`-vector per component, descending variance.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    pub mean: Vec<f64>,
    pub converged: bool,
}

pub fn pca_fit_transform(x: &Matrix, n_components: usize) -> Result<PcaFit, ReduceError> {
    let (n, d) = (x.nrows(), x.ncols());
    if n < 2 {
        return Err(ReduceError::TooFewPoints { need: 1, got: n });
    }
    if n_components == 0 || n_components > n.min(d) {
        return Err(ReduceError::InvalidParams("n_components must lie in 1..=min(n, d)"));
    }
    check_finite(x)?;

    let mut mean = vec![0.0; d];
    for row in x.rows_iter() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut centered = x.clone();
    for i in 0..n {
        for (v, m) in centered.row_mut(i).iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    let total_variance: f64 = centered.as_slice().iter().map(|v| v * v).sum::<f64>() / (n - 1) as f64;
    if !(total_variance > 0.0) {
        return Err(ReduceError::DegenerateInput);
    }

    let denom = (n - 1) as f64;
    let apply = |v: &[f64], out: &mut [f64]| {
        out.iter_mut().for_each(|o| *o = 0.0);
        for row in centered.rows_iter() {
            let s = dot(row, v) / denom;
            for (o, r) in out.iter_mut().zip(row) {
                *o += s * r;
            }
        }
    };
    let pairs = leading_eigenpairs(
        apply,
        d,
        n_components,
        &[],
        SubspaceIteration { block: (n_components + OVERSAMPLE).min(d), max_iters: 10_000, tol: 1e-14, seed: 0x9ca },
    );

    let mut components = pairs.vectors;
    for c in &mut components {
        // Largest-magnitude entry positive; ties go to the lowest index.
        let mut pivot = 0;
        for (i, v) in c.iter().enumerate() {
            if v.abs() > c[pivot].abs() {
                pivot = i;
            }
        }
        if c[pivot] < 0.0 {
            c.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let explained_variance: Vec<f64> = pairs.values.iter().map(|v| v.max(0.0)).collect();
    let explained_variance_ratio = explained_variance.iter().map(|v| v / total_variance).collect();

    let mut projection = Matrix::zeros(n, n_components);
    for i in 0..n {
        for (j, c) in components.iter().enumerate() {
            projection.set(i, j, dot(centered.row(i), c));
        }
    }
    Ok(PcaFit {
        projection,
        components,
        explained_variance,
        explained_variance_ratio,
        mean,
        converged: pairs.converged,
    })
}

/// Two-component PCA with term ids attached.
pub fn project(ids: Vec<String>, x: &Matrix) -> Result<Projection2D, ReduceError> {
    let fit = pca_fit_transform(x, 2)?;
    Ok(Projection2D {
        ids,
        coords: (0..x.nrows()).map(|i| [fit.projection.get(i, 0), fit.projection.get(i, 1)]).collect(),
        source: ProjectionSource::Pca { explained_variance_ratio: fit.explained_variance_ratio },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_points_have_one_component() {
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|t| {
                let t = t as f64;
                vec![1.0 + 2.0 * t, -t, 0.5 * t]
            })
            .collect();
        let fit = pca_fit_transform(&Matrix::from_rows(&rows).unwrap(), 2).unwrap();
        assert!((fit.explained_variance_ratio[0] - 1.0).abs() < 1e-9);
        assert!(fit.explained_variance[1].abs() < 1e-9);
    }

    #[test]
    fn identical_rows_are_degenerate() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(pca_fit_transform(&x, 1), Err(ReduceError::DegenerateInput));
    }

    #[test]
    fn too_many_components() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 5.0]]).unwrap();
        assert!(matches!(pca_fit_transform(&x, 3), Err(ReduceError::InvalidParams(_))));
    }

    #[test]
    fn sign_convention_holds() {
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|i| {
                let t = i as f64;
                vec![-3.0 * t, 0.1 * (t * t), 1.0 - t]
            })
            .collect();
        let fit = pca_fit_transform(&Matrix::from_rows(&rows).unwrap(), 2).unwrap();
        for c in &fit.components {
            let max = c.iter().copied().fold(0.0_f64, |m, v| if v.abs() > m.abs() { v } else { m });
            assert!(max > 0.0);
        }
    }
}
