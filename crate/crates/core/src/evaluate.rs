//! Purity, within/cross-concept separation and the concept → parent-term report.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::ParentTree;
use crate::corpus::ConceptIndex;
use crate::geometry::{histogram, within_cross_values, GeometryError, Histogram};
use crate::vecstore::TermVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{assignments} assignments but {labels} gold labels")]
    LabelMismatch { assignments: usize, labels: usize },
    #[error("no points to evaluate")]
    EmptyInput,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `(1/N) Σ_clusters max_label |cluster ∩ label|`.
pub fn purity<C: Ord, L: Ord>(assignments: &[C], gold: &[L]) -> Result<f64, EvalError> {
    if assignments.len() != gold.len() {
        return Err(EvalError::LabelMismatch { assignments: assignments.len(), labels: gold.len() });
    }
    if assignments.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut table: BTreeMap<&C, BTreeMap<&L, usize>> = BTreeMap::new();
    for (c, l) in assignments.iter().zip(gold) {
        *table.entry(c).or_default().entry(l).or_default() += 1;
    }
    let majority: usize = table.values().map(|m| m.values().copied().max().unwrap_or(0)).sum();
    Ok(majority as f64 / assignments.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub within: Option<Histogram>,
    pub cross: Option<Histogram>,
    /// `mean(within) - mean(cross)` over the raw values; absent if either side is empty.
    pub mean_gap: Option<f64>,
    pub mean_within: Option<f64>,
    pub mean_cross: Option<f64>,
    pub n_within: u64,
    pub n_cross: u64,
    pub n_terms: u64,
}

fn mean(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

fn optional_histogram(v: &[f64]) -> Result<Option<Histogram>, GeometryError> {
    match histogram(v) {
        Ok(h) => Ok(Some(h)),
        Err(GeometryError::EmptyInput) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Builds the report directly from raw value lists (no binning bias in the gap).
pub fn separation_from_values(within: &[f64], cross: &[f64], n_terms: usize) -> Result<SeparationReport, EvalError> {
    let (mw, mc) = (mean(within), mean(cross));
    Ok(SeparationReport {
        within: optional_histogram(within)?,
        cross: optional_histogram(cross)?,
        mean_gap: mw.zip(mc).map(|(w, c)| w - c),
        mean_within: mw,
        mean_cross: mc,
        n_within: within.len() as u64,
        n_cross: cross.len() as u64,
        n_terms: n_terms as u64,
    })
}

pub fn separation_report(index: &ConceptIndex, store: &[TermVector]) -> Result<SeparationReport, EvalError> {
    let wc = within_cross_values(index, store)?;
    separation_from_values(&wc.within, &wc.cross, wc.n_terms)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptRow {
    pub concept_label: String,
    pub canonical_term: String,
    pub cluster_size: usize,
    pub centroid_cosine: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConceptReport {
    pub rows: Vec<ConceptRow>,
}

/// One row per cluster, sorted by label then canonical term.
pub fn concept_report(tree: &ParentTree) -> ConceptReport {
    let mut rows: Vec<ConceptRow> = tree
        .clusters
        .iter()
        .map(|c| ConceptRow {
            concept_label: c.label.clone(),
            canonical_term: c.parent.clone(),
            cluster_size: c.members.len(),
            centroid_cosine: c.centroid_cosine,
        })
        .collect();
    rows.sort_by(|a, b| a.concept_label.cmp(&b.concept_label).then_with(|| a.canonical_term.cmp(&b.canonical_term)));
    ConceptReport { rows }
}

/// Comparison of elected terms against an expected concept → term table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CanonicalMatch {
    pub matched: usize,
    pub total: usize,
    pub mismatches: Vec<CanonicalMismatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalMismatch {
    pub concept_label: String,
    pub expected: String,
    pub elected: Option<String>,
    pub centroid_cosine: Option<f64>,
}

pub fn canonical_match(report: &ConceptReport, expected: &[(&str, &str)]) -> CanonicalMatch {
    let mut out = CanonicalMatch { total: expected.len(), ..Default::default() };
    for &(label, term) in expected {
        let row = report.rows.iter().find(|r| r.concept_label == label);
        if row.is_some_and(|r| r.canonical_term == term) {
            out.matched += 1;
        } else {
            out.mismatches.push(CanonicalMismatch {
                concept_label: label.into(),
                expected: term.into(),
                elected: row.map(|r| r.canonical_term.clone()),
                centroid_cosine: row.map(|r| r.centroid_cosine),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{LabelSource, ParentCluster};
    use alloc::vec;

    #[test]
    fn identical_clustering_is_pure() {
        assert_eq!(purity(&[0, 0, 1, 1], &["a", "a", "b", "b"]).unwrap(), 1.0);
    }

    #[test]
    fn mixed_cluster_contributes_half() {
        assert_eq!(purity(&[0, 0, 0, 0], &["a", "a", "b", "b"]).unwrap(), 0.5);
    }

    #[test]
    fn purity_length_mismatch() {
        assert!(matches!(purity(&[0, 1], &["a"]), Err(EvalError::LabelMismatch { .. })));
        assert_eq!(purity::<usize, &str>(&[], &[]), Err(EvalError::EmptyInput));
    }

    #[test]
    fn constant_lists_gap() {
        let r = separation_from_values(&[0.9; 4], &[0.1; 6], 5).unwrap();
        assert!((r.mean_gap.unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(r.n_within + r.n_cross, 10);
    }

    #[test]
    fn single_concept_has_no_cross_histogram() {
        let r = separation_from_values(&[0.7, 0.8, 0.9], &[], 3).unwrap();
        assert!(r.cross.is_none());
        assert_eq!(r.n_cross, 0);
        assert!(r.mean_gap.is_none());
    }

    fn cluster(label: &str, parent: &str, members: &[&str], cos: f64) -> ParentCluster {
        ParentCluster {
            label: label.into(),
            parent: parent.into(),
            members: members.iter().map(|m| (*m).into()).collect(),
            group_id: None,
            cluster_id: 0,
            label_source: LabelSource::Gold,
            centroid_cosine: cos,
        }
    }

    #[test]
    fn report_rows_sorted_by_label() {
        let tree = ParentTree {
            clusters: vec![
                cluster("Itching", "itching", &["itching", "itchy"], 0.98),
                cluster("Headache", "head pain", &["head pain", "headaches"], 0.97),
                cluster("Tired", "feel tired", &["feel tired"], 1.0),
            ],
            warnings: vec![],
        };
        let r = concept_report(&tree);
        let labels: Vec<&str> = r.rows.iter().map(|r| r.concept_label.as_str()).collect();
        assert_eq!(labels, ["Headache", "Itching", "Tired"]);
        assert_eq!(r.rows[1].canonical_term, "itching");
        assert_eq!(r.rows[2].cluster_size, 1);

        let m = canonical_match(&r, &[("Headache", "head pain"), ("Tired", "tired")]);
        assert_eq!(m.matched, 1);
        assert_eq!(m.mismatches[0].elected.as_deref(), Some("feel tired"));
    }
}
