//! Token-level embedding records and their pooling into one vector per term.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::norm;

/// Norms at or below this are treated as zero.
pub const ZERO_NORM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VecStoreError {
    #[error("term {term_id}: expected dimension {expected}, found {found}")]
    DimMismatch { term_id: String, expected: usize, found: usize },
    #[error("term {term_id}: {tokens} tokens but {vectors} vectors")]
    TokenCountMismatch { term_id: String, tokens: usize, vectors: usize },
    #[error("term {term_id}: record has no tokens")]
    NoTokens { term_id: String },
    #[error("term {term_id}: non-finite value in token {token}")]
    NonFiniteValue { term_id: String, token: usize },
    #[error("term {term_id}: zero vector cannot be normalized")]
    ZeroVector { term_id: String },
    #[error("term {term_id}: flagged normalized but norm is not 1")]
    NotUnitNorm { term_id: String },
}

/// The subword tokens of one term with one `dim`-length vector per token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenEmbeddingRecord {
    pub term_id: String,
    pub term: String,
    pub concept_label: Option<String>,
    pub dim: usize,
    pub tokens: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
}

impl TokenEmbeddingRecord {
    pub fn validate(&self) -> Result<(), VecStoreError> {
        let term_id = || self.term_id.clone();
        if self.tokens.is_empty() && self.vectors.is_empty() {
            return Err(VecStoreError::NoTokens { term_id: term_id() });
        }
        if self.tokens.len() != self.vectors.len() {
            return Err(VecStoreError::TokenCountMismatch {
                term_id: term_id(),
                tokens: self.tokens.len(),
                vectors: self.vectors.len(),
            });
        }
        for (token, v) in self.vectors.iter().enumerate() {
            if v.len() != self.dim {
                return Err(VecStoreError::DimMismatch { term_id: term_id(), expected: self.dim, found: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(VecStoreError::NonFiniteValue { term_id: term_id(), token });
            }
        }
        Ok(())
    }
}

/// One vector per unique term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermVector {
    pub term_id: String,
    pub term: String,
    pub concept_label: Option<String>,
    pub vector: Vec<f64>,
    pub normalized: bool,
}

impl TermVector {
    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

/// Elementwise sum of the record's token vectors. No averaging.
pub fn pool_term(record: &TokenEmbeddingRecord) -> Result<TermVector, VecStoreError> {
    record.validate()?;
    let mut sum = alloc::vec![0.0; record.dim];
    for v in &record.vectors {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    Ok(TermVector {
        term_id: record.term_id.clone(),
        term: record.term.clone(),
        concept_label: record.concept_label.clone(),
        vector: sum,
        normalized: false,
    })
}

pub fn l2_normalize(v: &TermVector) -> Result<TermVector, VecStoreError> {
    let n = norm(&v.vector);
    if !(n > ZERO_NORM) {
        return Err(VecStoreError::ZeroVector { term_id: v.term_id.clone() });
    }
    Ok(TermVector { vector: v.vector.iter().map(|x| x / n).collect(), normalized: true, ..v.clone() })
}

/// Pools and normalizes a whole file's worth of records, keeping the raw sums.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledStore {
    pub raw: Vec<TermVector>,
    pub normalized: Vec<TermVector>,
}

pub fn build_store(records: &[TokenEmbeddingRecord]) -> Result<PooledStore, VecStoreError> {
    let raw = records.iter().map(pool_term).collect::<Result<Vec<_>, _>>()?;
    let normalized = raw.iter().map(l2_normalize).collect::<Result<Vec<_>, _>>()?;
    Ok(PooledStore { raw, normalized })
}

/// Checks that every vector shares one dimension and is finite, and that
/// vectors flagged as normalized have unit norm within `1e-9`.
pub fn validate_store(vectors: &[TermVector]) -> Result<(), VecStoreError> {
    let Some(first) = vectors.first() else { return Ok(()) };
    let dim = first.dim();
    for v in vectors {
        if v.dim() != dim {
            return Err(VecStoreError::DimMismatch { term_id: v.term_id.clone(), expected: dim, found: v.dim() });
        }
        if v.vector.iter().any(|x| !x.is_finite()) {
            return Err(VecStoreError::NonFiniteValue { term_id: v.term_id.clone(), token: 0 });
        }
        if v.normalized && (norm(&v.vector) - 1.0).abs() > 1e-9 {
            return Err(VecStoreError::NotUnitNorm { term_id: v.term_id.clone() });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn record(vectors: Vec<Vec<f64>>) -> TokenEmbeddingRecord {
        TokenEmbeddingRecord {
            term_id: "t0".into(),
            term: "gas pains".into(),
            concept_label: Some("Abdominal Wind Pain".into()),
            dim: vectors.first().map_or(0, Vec::len),
            tokens: (0..vectors.len()).map(|i| alloc::format!("tok{i}")).collect(),
            vectors,
        }
    }

    #[test]
    fn single_token_identity() {
        let tv = pool_term(&record(vec![vec![0.5, -1.0]])).unwrap();
        assert_eq!(tv.vector, [0.5, -1.0]);
        assert!(!tv.normalized);
    }

    #[test]
    fn elementwise_sum() {
        let tv = pool_term(&record(vec![vec![1.0, 2.0], vec![3.0, 4.0]])).unwrap();
        assert_eq!(tv.vector, [4.0, 6.0]);
    }

    #[test]
    fn token_vector_count_mismatch() {
        let mut r = record(vec![vec![1.0], vec![2.0]]);
        r.tokens.push("extra".into());
        assert!(matches!(pool_term(&r), Err(VecStoreError::TokenCountMismatch { tokens: 3, vectors: 2, .. })));
    }

    #[test]
    fn non_finite_rejected() {
        let r = record(vec![vec![1.0, f64::NAN]]);
        assert!(matches!(r.validate(), Err(VecStoreError::NonFiniteValue { .. })));
    }

    #[test]
    fn normalize_three_four_five() {
        let tv = pool_term(&record(vec![vec![3.0, 4.0]])).unwrap();
        let n = l2_normalize(&tv).unwrap();
        assert!((n.vector[0] - 0.6).abs() < 1e-15);
        assert!((n.vector[1] - 0.8).abs() < 1e-15);
        assert!(n.normalized);
    }

    #[test]
    fn normalize_unit_is_identity() {
        let tv = pool_term(&record(vec![vec![0.6, 0.8]])).unwrap();
        let n = l2_normalize(&tv).unwrap();
        for (a, b) in n.vector.iter().zip(&tv.vector) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_zero_vector() {
        let tv = pool_term(&record(vec![vec![0.0, 0.0]])).unwrap();
        assert!(matches!(l2_normalize(&tv), Err(VecStoreError::ZeroVector { .. })));
    }
}
