//! Synthetic stand-in for a licensed mention corpus plus encoder output.
//!
//! Concept directions are orthonormalized Gaussian draws. Every synonym is its
//! concept direction plus isotropic Gaussian noise, emitted as a single-token
//! record. Term 0 of each concept is planted exactly on the direction, so it
//! is the term a correct election should return.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::MentionRecord;
use crate::linalg::orthogonalize_against;
use crate::seed::rng_from_seed;
use crate::vecstore::TokenEmbeddingRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub seed: u64,
    pub n_concepts: usize,
    pub terms_per_concept: usize,
    pub dim: usize,
    pub noise_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("dim {dim} cannot hold {n_concepts} orthogonal directions (need dim >= max(4, n_concepts))")]
    DimTooSmall { dim: usize, n_concepts: usize },
    #[error("need at least 2 concepts")]
    TooFewConcepts,
    #[error("terms_per_concept must be positive")]
    NoTerms,
    #[error("noise_sigma must be finite and non-negative")]
    BadSigma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTerm {
    pub concept_label: String,
    pub term: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthFixture {
    pub mentions: Vec<MentionRecord>,
    pub tokens: Vec<TokenEmbeddingRecord>,
    pub directions: Vec<Vec<f64>>,
    pub planted: Vec<PlantedTerm>,
}

pub fn concept_label(i: usize) -> String {
    format!("Concept {i:02}")
}

pub fn term_name(concept: usize, j: usize) -> String {
    format!("c{concept:02} synonym {j:02}")
}

pub fn synth_fixture(p: &SynthParams) -> Result<SynthFixture, SynthError> {
    if p.n_concepts < 2 {
        return Err(SynthError::TooFewConcepts);
    }
    if p.dim < 4 || p.dim < p.n_concepts {
        return Err(SynthError::DimTooSmall { dim: p.dim, n_concepts: p.n_concepts });
    }
    if p.terms_per_concept == 0 {
        return Err(SynthError::NoTerms);
    }
    if !(p.noise_sigma >= 0.0) || !p.noise_sigma.is_finite() {
        return Err(SynthError::BadSigma);
    }

    let mut rng = rng_from_seed(p.seed);
    let mut directions: Vec<Vec<f64>> = Vec::with_capacity(p.n_concepts);
    while directions.len() < p.n_concepts {
        let mut v: Vec<f64> = (0..p.dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = orthogonalize_against(&mut v, &directions);
        if n > 1e-6 {
            v.iter_mut().for_each(|x| *x /= n);
            directions.push(v);
        }
    }

    let mut fixture =
        SynthFixture { mentions: Vec::new(), tokens: Vec::new(), directions: Vec::new(), planted: Vec::new() };
    for (c, dir) in directions.iter().enumerate() {
        let label = concept_label(c);
        for j in 0..p.terms_per_concept {
            let term = term_name(c, j);
            let vector: Vec<f64> = if j == 0 {
                dir.clone()
            } else {
                dir.iter().map(|d| d + p.noise_sigma * rng.sample::<f64, _>(StandardNormal)).collect()
            };
            let row_id = fixture.mentions.len();
            fixture.mentions.push(MentionRecord {
                row_id,
                example: format!("synthetic mention of {term}"),
                term: term.clone(),
                concept_label: label.clone(),
            });
            fixture.tokens.push(TokenEmbeddingRecord {
                term_id: format!("t{row_id}"),
                term: term.clone(),
                concept_label: Some(label.clone()),
                dim: p.dim,
                tokens: alloc::vec![term.clone()],
                vectors: alloc::vec![vector],
            });
        }
        fixture.planted.push(PlantedTerm { concept_label: label, term: term_name(c, 0) });
    }
    fixture.directions = directions;
    Ok(fixture)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    fn params() -> SynthParams {
        SynthParams { seed: 7, n_concepts: 5, terms_per_concept: 8, dim: 32, noise_sigma: 0.05 }
    }

    #[test]
    fn counts() {
        let f = synth_fixture(&params()).unwrap();
        assert_eq!(f.mentions.len(), 40);
        assert_eq!(f.tokens.len(), 40);
        let labels: alloc::collections::BTreeSet<_> = f.mentions.iter().map(|m| &m.concept_label).collect();
        assert_eq!(labels.len(), 5);
        assert_eq!(f.planted.len(), 5);
    }

    #[test]
    fn zero_sigma_copies_direction() {
        let f = synth_fixture(&SynthParams { noise_sigma: 0.0, ..params() }).unwrap();
        for (i, t) in f.tokens.iter().enumerate() {
            assert_eq!(t.vectors[0], f.directions[i / 8]);
        }
    }

    #[test]
    fn directions_nearly_orthogonal() {
        let f = synth_fixture(&params()).unwrap();
        for i in 0..5 {
            for j in (i + 1)..5 {
                assert!(dot(&f.directions[i], &f.directions[j]).abs() <= 0.1);
            }
        }
    }

    #[test]
    fn dim_too_small() {
        let e = synth_fixture(&SynthParams { dim: 3, n_concepts: 2, ..params() }).unwrap_err();
        assert!(matches!(e, SynthError::DimTooSmall { .. }));
        let e = synth_fixture(&SynthParams { dim: 4, n_concepts: 6, ..params() }).unwrap_err();
        assert!(matches!(e, SynthError::DimTooSmall { .. }));
    }

    #[test]
    fn deterministic() {
        assert_eq!(synth_fixture(&params()).unwrap(), synth_fixture(&params()).unwrap());
    }
}
