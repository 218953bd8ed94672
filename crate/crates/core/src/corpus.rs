//! Mention corpus ingestion and the synonym index keyed by gold concept label.
//!
//! The corpus is tab-separated with a header row. Only three columns are used:
//! `Example` (source sentence), `Term` (surface mention) and
//! `General SNOMED Label` (gold concept). Header matching is case-insensitive
//! and ignores surrounding whitespace; everything else keeps its casing.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const EXAMPLE_COLUMN: &str = "Example";
pub const TERM_COLUMN: &str = "Term";
pub const LABEL_COLUMN: &str = "General SNOMED Label";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub row_id: usize,
    pub example: String,
    pub term: String,
    pub concept_label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("row {row_id}: empty field {field:?}")]
    EmptyField { row_id: usize, field: String },
}

/// A data row that was skipped during parsing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowReject {
    pub row_id: usize,
    pub field: String,
    pub reason: String,
}

impl From<&RowReject> for CorpusError {
    fn from(r: &RowReject) -> Self {
        CorpusError::EmptyField { row_id: r.row_id, field: r.field.clone() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedCorpus {
    pub records: Vec<MentionRecord>,
    pub rejects: Vec<RowReject>,
}

/// Parses tab-separated corpus text.
///
/// `row_id` is the 0-based index of the data row (blank lines are skipped and
/// not counted). Rows with an empty term or label are rejected and reported;
/// parsing continues.
pub fn parse_corpus(text: &str) -> Result<ParsedCorpus, CorpusError> {
    let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header = lines.by_ref().find(|l| !l.trim().is_empty()).unwrap_or("");
    let columns: Vec<String> = header.split('\t').map(|c| c.trim().to_lowercase()).collect();
    let find = |name: &str| {
        let want = name.to_lowercase();
        columns.iter().position(|c| *c == want).ok_or_else(|| CorpusError::MissingColumn(name.to_string()))
    };
    let example_col = find(EXAMPLE_COLUMN)?;
    let term_col = find(TERM_COLUMN)?;
    let label_col = find(LABEL_COLUMN)?;

    let mut out = ParsedCorpus::default();
    for (row_id, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        let field = |i: usize| fields.get(i).map_or("", |f| f.trim());
        let term = field(term_col);
        let label = field(label_col);
        let missing = if term.is_empty() {
            Some(TERM_COLUMN)
        } else if label.is_empty() {
            Some(LABEL_COLUMN)
        } else {
            None
        };
        if let Some(name) = missing {
            out.rejects.push(RowReject { row_id, field: name.to_string(), reason: format!("empty {name}") });
            continue;
        }
        out.records.push(MentionRecord {
            row_id,
            example: field(example_col).to_string(),
            term: term.to_string(),
            concept_label: label.to_string(),
        });
    }
    Ok(out)
}

/// A term seen under a second label after it was already indexed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermConflict {
    pub term: String,
    pub kept_label: String,
    pub dropped_label: String,
    pub row_id: usize,
}

/// Synonym sets per concept label.
///
/// Labels iterate in sorted order; terms keep first-occurrence order. Term ids
/// are `t<n>` with `n` the order in which the term was first ingested.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptIndex {
    pub concepts: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub term_ids: BTreeMap<String, String>,
    #[serde(default)]
    pub conflicts: Vec<TermConflict>,
    #[serde(default)]
    pub rejects: Vec<RowReject>,
}

impl ConceptIndex {
    pub fn n_concepts(&self) -> usize {
        self.concepts.len()
    }

    pub fn n_terms(&self) -> usize {
        self.concepts.values().map(Vec::len).sum()
    }

    /// `(label, term)` pairs, labels sorted, terms in insertion order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.concepts.iter().flat_map(|(l, ts)| ts.iter().map(move |t| (l.as_str(), t.as_str())))
    }

    pub fn label_of(&self, term: &str) -> Option<&str> {
        self.entries().find(|(_, t)| *t == term).map(|(l, _)| l)
    }

    pub fn term_id(&self, term: &str) -> Option<&str> {
        self.term_ids.get(term).map(String::as_str)
    }
}

/// Groups parsed mentions by concept label.
///
/// Dedupe is case-sensitive. A term that reappears under a different label
/// stays with its first label and the clash is recorded in `conflicts`.
pub fn build_concept_index(records: &[MentionRecord]) -> ConceptIndex {
    let mut index = ConceptIndex::default();
    let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
    for r in records {
        match owner.get(r.term.as_str()) {
            Some(&label) if label == r.concept_label => {}
            Some(&label) => index.conflicts.push(TermConflict {
                term: r.term.clone(),
                kept_label: label.to_string(),
                dropped_label: r.concept_label.clone(),
                row_id: r.row_id,
            }),
            None => {
                owner.insert(&r.term, &r.concept_label);
                let id = format!("t{}", index.term_ids.len());
                index.term_ids.insert(r.term.clone(), id);
                index.concepts.entry(r.concept_label.clone()).or_default().push(r.term.clone());
            }
        }
    }
    index
}
