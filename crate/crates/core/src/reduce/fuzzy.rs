//! Smooth-kNN calibration and the fuzzy union of directed memberships.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::knn::KnnGraph;

pub const SIGMA_MIN: f64 = 1e-6;
pub const SIGMA_MAX: f64 = 1e6;
pub const BISECTION_STEPS: usize = 64;
pub const CALIBRATION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub rho: f64,
    pub sigma: f64,
    /// `|Σ_j exp(-max(0, d_j - rho) / sigma) - log2(k)|`
    pub residual: f64,
    /// The target was unreachable inside the bracket; `sigma` sits on an edge.
    pub flagged: bool,
}

pub fn membership_sum(distances: &[f64], rho: f64, sigma: f64) -> f64 {
    distances.iter().map(|d| libm::exp(-(d - rho).max(0.0) / sigma)).sum()
}

/// Per-row `rho` (smallest nonzero distance) and `sigma` such that the row's
/// memberships sum to `log2(k)`, with `k = distances.len()`.
///
/// The search bisects in log space over `[SIGMA_MIN, SIGMA_MAX]` for
/// [`BISECTION_STEPS`] steps.
pub fn smooth_knn_calibrate(distances: &[f64]) -> Calibration {
    let k = distances.len();
    let target = libm::log2(k as f64);
    let rho = distances.iter().copied().find(|&d| d > 0.0).unwrap_or(0.0);

    let (mut lo, mut hi) = (SIGMA_MIN, SIGMA_MAX);
    for _ in 0..BISECTION_STEPS {
        let mid = libm::sqrt(lo * hi);
        if membership_sum(distances, rho, mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let res = |s: f64| (membership_sum(distances, rho, s) - target).abs();
    let sigma = if res(lo) <= res(hi) { lo } else { hi };
    let residual = res(sigma);
    if residual <= CALIBRATION_TOL {
        return Calibration { rho, sigma, residual, flagged: false };
    }
    // The sum increases with sigma: too large at the lower edge means the
    // target is below reach, otherwise it is above.
    let sigma = if membership_sum(distances, rho, SIGMA_MIN) > target { SIGMA_MIN } else { SIGMA_MAX };
    Calibration { rho, sigma, residual: res(sigma), flagged: true }
}

/// Directed edge `from -> to` with membership strength in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// `w_ij = exp(-max(0, d_ij - rho_i) / sigma_i)` over the kNN graph; zero
/// weights (underflow) are dropped.
pub fn directed_strengths(knn: &KnnGraph, calibrations: &[Calibration]) -> Vec<DirectedEdge> {
    let mut out = Vec::with_capacity(knn.indices.len());
    for (i, cal) in calibrations.iter().enumerate().take(knn.n()) {
        for (&j, &d) in knn.neighbors(i).iter().zip(knn.row_distances(i)) {
            let w = libm::exp(-(d - cal.rho).max(0.0) / cal.sigma);
            if w > 0.0 && j != i {
                out.push(DirectedEdge { from: i, to: j, weight: w });
            }
        }
    }
    out
}

/// Symmetric sparse membership graph in CSR form (columns sorted per row).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyGraph {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub values: Vec<f64>,
}

impl FuzzyGraph {
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn degrees(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }
}

/// `s_ij = w_ij + w_ji - w_ij * w_ji`, computed once per unordered pair.
///
/// Repeated directed edges keep the last weight; self loops are ignored.
pub fn fuzzy_union(n: usize, directed: &[DirectedEdge]) -> FuzzyGraph {
    let mut pairs: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    for e in directed.iter().filter(|e| e.from != e.to && e.from < n && e.to < n) {
        let (lo, hi) = if e.from < e.to { (e.from, e.to) } else { (e.to, e.from) };
        let slot = pairs.entry((lo, hi)).or_insert((0.0, 0.0));
        if e.from == lo {
            slot.0 = e.weight;
        } else {
            slot.1 = e.weight;
        }
    }

    let mut rows: Vec<Vec<(usize, f64)>> = alloc::vec![Vec::new(); n];
    for (&(i, j), &(a, b)) in &pairs {
        let s = (a + b - a * b).min(1.0);
        if s > 0.0 {
            rows[i].push((j, s));
            rows[j].push((i, s));
        }
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    for mut r in rows {
        r.sort_by_key(|&(j, _)| j);
        for (j, s) in r {
            cols.push(j);
            values.push(s);
        }
        row_ptr.push(cols.len());
    }
    FuzzyGraph { n, row_ptr, cols, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn all_at_rho_is_flagged_at_lower_edge() {
        let c = smooth_knn_calibrate(&[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(c.rho, 0.5);
        assert!(c.flagged);
        assert_eq!(c.sigma, SIGMA_MIN);
        assert!((membership_sum(&[0.5; 4], c.rho, c.sigma) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn target_is_log2_k() {
        let d = [0.1, 0.2, 0.4, 0.8];
        let c = smooth_knn_calibrate(&d);
        assert!(!c.flagged);
        assert!((membership_sum(&d, c.rho, c.sigma) - 2.0).abs() <= CALIBRATION_TOL);
    }

    #[test]
    fn rho_skips_zero_distances() {
        let c = smooth_knn_calibrate(&[0.0, 0.0, 0.3, 0.9, 1.2, 2.0, 2.5, 3.0]);
        assert_eq!(c.rho, 0.3);
    }

    #[test]
    fn union_formula_cases() {
        let e = |from, to, weight| DirectedEdge { from, to, weight };
        let g = fuzzy_union(2, &[e(0, 1, 1.0)]);
        assert_eq!(g.get(0, 1), 1.0);
        assert_eq!(g.get(1, 0), 1.0);
        let g = fuzzy_union(2, &[e(0, 1, 0.5), e(1, 0, 0.5)]);
        assert_eq!(g.get(0, 1), 0.75);
        assert_eq!(g.get(0, 0), 0.0);
    }

    #[test]
    fn union_ignores_self_loops() {
        let g = fuzzy_union(2, &[DirectedEdge { from: 1, to: 1, weight: 0.3 }]);
        assert_eq!(g.nnz(), 0);
        assert_eq!(g.row_ptr, vec![0, 0, 0]);
    }
}
