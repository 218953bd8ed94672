//! Cosine similarity kernels, pairwise similarity matrices and fixed-bin
//! similarity histograms.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::ConceptIndex;
use crate::linalg::{dot, norm};
use crate::vecstore::{TermVector, ZERO_NORM};

pub const HISTOGRAM_BINS: usize = 40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("zero vector")]
    ZeroVector,
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("need at least {need} vectors, got {got}")]
    TooFewVectors { need: usize, got: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("value {0} outside [-1, 1]")]
    OutOfRange(f64),
    #[error("no vector for term {0:?}")]
    MissingVector(String),
}

/// `dot(v, w) / (|v| |w|)` clamped to `[-1, 1]`.
pub fn cosine(v: &[f64], w: &[f64]) -> Result<f64, GeometryError> {
    if v.len() != w.len() {
        return Err(GeometryError::DimMismatch(v.len(), w.len()));
    }
    let (nv, nw) = (norm(v), norm(w));
    if !(nv > ZERO_NORM) || !(nw > ZERO_NORM) {
        return Err(GeometryError::ZeroVector);
    }
    Ok((dot(v, w) / (nv * nw)).clamp(-1.0, 1.0))
}

/// Symmetric cosine similarity matrix; each off-diagonal cell is computed once
/// and mirrored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub ids: Vec<String>,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.values[i * n..(i + 1) * n]
    }
}

pub fn pairwise(vectors: &[TermVector]) -> Result<SimilarityMatrix, GeometryError> {
    let n = vectors.len();
    if n < 2 {
        return Err(GeometryError::TooFewVectors { need: 2, got: n });
    }
    let dim = vectors[0].dim();
    let mut norms = Vec::with_capacity(n);
    for v in vectors {
        if v.dim() != dim {
            return Err(GeometryError::DimMismatch(dim, v.dim()));
        }
        let nv = norm(&v.vector);
        if !(nv > ZERO_NORM) {
            return Err(GeometryError::ZeroVector);
        }
        norms.push(nv);
    }
    let mut values = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let c = (dot(&vectors[i].vector, &vectors[j].vector) / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            values[i * n + j] = c;
            values[j * n + i] = c;
        }
    }
    Ok(SimilarityMatrix { ids: vectors.iter().map(|v| v.term_id.clone()).collect(), values })
}

/// 40 uniform bins over `[-1, 1]`; bins are half-open except the last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    #[serde(rename = "edges")]
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n: u64,
    pub mean: f64,
    pub std: f64,
}

pub fn bin_edges() -> Vec<f64> {
    let half = (HISTOGRAM_BINS / 2) as f64;
    (0..=HISTOGRAM_BINS).map(|i| (i as f64 - half) / half).collect()
}

/// Histogram with sample mean and sample (n - 1) standard deviation.
///
/// Values within `1e-9` outside `[-1, 1]` are clamped; anything further out is
/// rejected.
pub fn histogram(values: &[f64]) -> Result<Histogram, GeometryError> {
    if values.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    let edges = bin_edges();
    let mut counts = alloc::vec![0u64; HISTOGRAM_BINS];
    for &raw in values {
        if !raw.is_finite() || !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&raw) {
            return Err(GeometryError::OutOfRange(raw));
        }
        let v = raw.clamp(-1.0, 1.0);
        let mut b = (libm::floor((v + 1.0) * (HISTOGRAM_BINS as f64 / 2.0)) as usize).min(HISTOGRAM_BINS - 1);
        while b > 0 && v < edges[b] {
            b -= 1;
        }
        while b + 1 < HISTOGRAM_BINS && v >= edges[b + 1] {
            b += 1;
        }
        counts[b] += 1;
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64)
    } else {
        0.0
    };
    Ok(Histogram { bin_edges: edges, counts, n: n as u64, mean, std })
}

/// Pairwise similarities split by whether both terms share a gold concept.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WithinCross {
    pub within: Vec<f64>,
    pub cross: Vec<f64>,
    pub n_terms: usize,
}

fn lookup(store: &[TermVector]) -> BTreeMap<&str, &TermVector> {
    store.iter().map(|v| (v.term.as_str(), v)).collect()
}

/// Self-pairs are excluded. Terms are visited in index order (labels sorted,
/// terms in insertion order), so output order is deterministic.
pub fn within_cross_values(index: &ConceptIndex, store: &[TermVector]) -> Result<WithinCross, GeometryError> {
    let by_term = lookup(store);
    let mut items: Vec<(&str, &TermVector)> = Vec::with_capacity(index.n_terms());
    for (label, term) in index.entries() {
        let v = by_term.get(term).ok_or_else(|| GeometryError::MissingVector(term.to_string()))?;
        items.push((label, v));
    }
    let mut out = WithinCross { n_terms: items.len(), ..Default::default() };
    for i in 0..items.len() {
        for j in (i + 1)..items.len() {
            let c = cosine(&items[i].1.vector, &items[j].1.vector)?;
            if items[i].0 == items[j].0 {
                out.within.push(c);
            } else {
                out.cross.push(c);
            }
        }
    }
    Ok(out)
}

/// Within-concept similarities of a single concept.
pub fn concept_values(index: &ConceptIndex, store: &[TermVector], label: &str) -> Result<Vec<f64>, GeometryError> {
    let by_term = lookup(store);
    let terms = index.concepts.get(label).map(Vec::as_slice).unwrap_or(&[]);
    let vs = terms
        .iter()
        .map(|t| by_term.get(t.as_str()).copied().ok_or_else(|| GeometryError::MissingVector(t.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::new();
    for i in 0..vs.len() {
        for j in (i + 1)..vs.len() {
            out.push(cosine(&vs[i].vector, &vs[j].vector)?);
        }
    }
    Ok(out)
}
