//! Fit of the low-dimensional membership curve `Φ(x) = 1 / (1 + a x^(2b))`
//! to the offset exponential `ψ(x) = 1` for `x <= min_dist`,
//! `exp(-(x - min_dist))` beyond it, sampled at 300 points on `[0, 3]`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub const SAMPLES: usize = 300;
pub const SPAN: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveFit {
    pub a: f64,
    pub b: f64,
    /// Sum of squared residuals over the samples.
    pub residual: f64,
    pub iterations: usize,
}

pub fn phi(a: f64, b: f64, x: f64) -> f64 {
    1.0 / (1.0 + a * libm::pow(x, 2.0 * b))
}

pub fn target(min_dist: f64, x: f64) -> f64 {
    if x <= min_dist {
        1.0
    } else {
        libm::exp(-(x - min_dist))
    }
}

pub fn sample_points() -> Vec<f64> {
    (0..SAMPLES).map(|i| SPAN * i as f64 / (SAMPLES - 1) as f64).collect()
}

pub fn sum_squares(a: f64, b: f64, min_dist: f64) -> f64 {
    sample_points()
        .into_iter()
        .map(|x| {
            let r = phi(a, b, x) - target(min_dist, x);
            r * r
        })
        .sum()
}

/// Levenberg–Marquardt from `(1, 1)` with the analytic Jacobian.
pub fn fit_ab(min_dist: f64) -> CurveFit {
    let xs = sample_points();
    let ys: Vec<f64> = xs.iter().map(|&x| target(min_dist, x)).collect();
    let (mut a, mut b) = (1.0_f64, 1.0_f64);
    let mut cost = sum_squares(a, b, min_dist);
    let mut lambda = 1e-3;
    let mut iterations = 0;

    for it in 0..500 {
        iterations = it + 1;
        // Normal equations J^T J δ = -J^T r.
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&x, &y) in xs.iter().zip(&ys) {
            if x == 0.0 {
                continue; // Φ(0) = 1 regardless of (a, b)
            }
            let u = libm::pow(x, 2.0 * b);
            let den = 1.0 + a * u;
            let r = 1.0 / den - y;
            let da = -u / (den * den);
            let db = -a * u * 2.0 * libm::log(x) / (den * den);
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }

        let mut improved = false;
        for _ in 0..60 {
            let (m00, m11) = (jaa * (1.0 + lambda), jbb * (1.0 + lambda));
            let det = m00 * m11 - jab * jab;
            if det == 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let step_a = -(m11 * ga - jab * gb) / det;
            let step_b = -(m00 * gb - jab * ga) / det;
            let (na, nb) = (a + step_a, b + step_b);
            if na > 0.0 && nb > 0.0 {
                let c = sum_squares(na, nb, min_dist);
                if c < cost {
                    let rel = (cost - c) / cost.max(1e-300);
                    a = na;
                    b = nb;
                    cost = c;
                    lambda = (lambda * 0.3).max(1e-12);
                    improved = rel > 1e-15;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    CurveFit { a, b, residual: cost, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_at_zero_is_one() {
        for md in [0.01, 0.1, 0.5, 1.0] {
            let f = fit_ab(md);
            assert_eq!(phi(f.a, f.b, 0.0), 1.0);
        }
    }

    #[test]
    fn fit_beats_unit_baseline() {
        let f = fit_ab(0.1);
        assert!(f.residual <= sum_squares(1.0, 1.0, 0.1));
    }
}
