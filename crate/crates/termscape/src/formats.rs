//! On-disk formats: token-embedding and vector-store JSON lines, projection
//! CSV, parent-tree DOT and plain-text report tables.
//!
//! JSON lines files start with a meta object `{"type":"meta","dim":D,...}`.
//! Line numbers in errors are 1-based and count every physical line.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use termscape_core::cluster::ParentTree;
use termscape_core::corpus::{MentionRecord, EXAMPLE_COLUMN, LABEL_COLUMN, TERM_COLUMN};
use termscape_core::evaluate::ConceptReport;
use termscape_core::reduce::Projection2D;
use termscape_core::vecstore::{validate_store, VecStoreError};
use termscape_core::{TermVector, TokenEmbeddingRecord};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("missing meta line")]
    MissingMeta,
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: expected dimension {expected}, found {found}")]
    DimMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: non-finite value in term {term_id}")]
    NonFiniteValue { line: usize, term_id: String },
    #[error("line {line}: duplicate term id {term_id}")]
    DuplicateTermId { line: usize, term_id: String },
    #[error("csv: {0}")]
    Csv(String),
}

fn malformed(line: usize, reason: impl ToString) -> FormatError {
    FormatError::MalformedLine { line, reason: reason.to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(rename = "type")]
    pub kind: String,
    pub dim: usize,
    #[serde(default)]
    pub model: String,
    /// Any further keys (layer policy, provenance) are kept verbatim.
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Meta {
    pub fn new(dim: usize, model: impl Into<String>) -> Self {
        Self { kind: "meta".into(), dim, model: model.into(), extra: Map::new() }
    }
}

/// A JSON number, or one of the non-finite spellings some encoders emit.
#[derive(Deserialize)]
#[serde(untagged)]
enum Float {
    Num(f64),
    Text(String),
}

impl Float {
    fn value(self) -> Option<f64> {
        match self {
            Float::Num(v) => Some(v),
            Float::Text(s) => match s.as_str() {
                "NaN" | "-NaN" => Some(f64::NAN),
                "Infinity" | "inf" => Some(f64::INFINITY),
                "-Infinity" | "-inf" => Some(f64::NEG_INFINITY),
                _ => None,
            },
        }
    }
}

/// Quotes bare `NaN`, `Infinity` and `-Infinity` tokens outside strings so the
/// line parses as JSON and the value can be reported as non-finite.
fn quote_non_finite(line: &str) -> std::borrow::Cow<'_, str> {
    if !line.contains("NaN") && !line.contains("Infinity") {
        return line.into();
    }
    let mut out = String::with_capacity(line.len() + 8);
    let (mut in_str, mut escaped) = (false, false);
    let mut rest = line;
    while let Some(c) = rest.chars().next() {
        if in_str {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_str = false;
            }
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if c == '"' {
            in_str = true;
        }
        let token = ["-Infinity", "Infinity", "NaN"].into_iter().find(|t| rest.starts_with(t));
        if let Some(t) = token {
            let _ = write!(out, "\"{t}\"");
            rest = &rest[t.len()..];
        } else {
            out.push(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    out.into()
}

fn parse_meta(lines: &mut impl Iterator<Item = (usize, String)>) -> Result<Meta, FormatError> {
    let (no, text) = lines.next().ok_or(FormatError::MissingMeta)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| malformed(no, e))?;
    if value.get("type").and_then(Value::as_str) != Some("meta") {
        return Err(FormatError::MissingMeta);
    }
    let meta: Meta = serde_json::from_value(value).map_err(|e| malformed(no, e))?;
    if meta.dim == 0 {
        return Err(malformed(no, "meta dim must be positive"));
    }
    Ok(meta)
}

fn numbered(text: &str) -> impl Iterator<Item = (usize, String)> + '_ {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, quote_non_finite(l).into_owned()))
}

fn floats(line: usize, raw: Vec<Float>) -> Result<Vec<f64>, FormatError> {
    raw.into_iter().map(|f| f.value().ok_or_else(|| malformed(line, "vector entries must be numbers"))).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TokenLine {
    term_id: String,
    term: String,
    #[serde(default)]
    concept: Option<String>,
    tokens: Vec<String>,
    vectors: Vec<Vec<Float>>,
}

#[derive(Serialize)]
struct TokenLineOut<'a> {
    term_id: &'a str,
    term: &'a str,
    concept: &'a Option<String>,
    tokens: &'a [String],
    vectors: &'a [Vec<f64>],
}

fn map_record_error(line: usize, e: VecStoreError) -> FormatError {
    match e {
        VecStoreError::DimMismatch { expected, found, .. } => FormatError::DimMismatch { line, expected, found },
        VecStoreError::NonFiniteValue { term_id, .. } => FormatError::NonFiniteValue { line, term_id },
        other => malformed(line, other),
    }
}

/// Parses a token-embedding file and validates every record.
pub fn parse_token_embeddings(text: &str) -> Result<(Meta, Vec<TokenEmbeddingRecord>), FormatError> {
    let mut lines = numbered(text);
    let meta = parse_meta(&mut lines)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (no, text) in lines {
        let raw: TokenLine = serde_json::from_str(&text).map_err(|e| malformed(no, e))?;
        let vectors = raw.vectors.into_iter().map(|v| floats(no, v)).collect::<Result<Vec<_>, _>>()?;
        let record = TokenEmbeddingRecord {
            term_id: raw.term_id,
            term: raw.term,
            concept_label: raw.concept,
            dim: meta.dim,
            tokens: raw.tokens,
            vectors,
        };
        record.validate().map_err(|e| map_record_error(no, e))?;
        if !seen.insert(record.term_id.clone()) {
            return Err(FormatError::DuplicateTermId { line: no, term_id: record.term_id });
        }
        out.push(record);
    }
    Ok((meta, out))
}

pub fn render_token_embeddings(meta: &Meta, records: &[TokenEmbeddingRecord]) -> String {
    let mut s = serde_json::to_string(meta).expect("meta serializes");
    s.push('\n');
    for r in records {
        let line = TokenLineOut {
            term_id: &r.term_id,
            term: &r.term,
            concept: &r.concept_label,
            tokens: &r.tokens,
            vectors: &r.vectors,
        };
        s.push_str(&serde_json::to_string(&line).expect("finite vectors serialize"));
        s.push('\n');
    }
    s
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StoreLineIn {
    term_id: String,
    term: String,
    #[serde(default)]
    concept: Option<String>,
    vector: Vec<Float>,
    normalized: bool,
    #[serde(default)]
    raw: Option<Vec<Float>>,
}

#[derive(Serialize)]
struct StoreLine {
    term_id: String,
    term: String,
    concept: Option<String>,
    vector: Vec<f64>,
    normalized: bool,
    /// Unnormalized pooled sum, kept next to the normalized vector.
    #[serde(skip_serializing_if = "Option::is_none")]
    raw: Option<Vec<f64>>,
}

/// A parsed vector store. `raw` is present when every line carried one.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorStore {
    pub meta: Meta,
    pub vectors: Vec<TermVector>,
    pub raw: Option<Vec<TermVector>>,
}

impl VectorStore {
    /// Vectors for projection: the stored ones, or the raw sums when asked
    /// and available.
    pub fn select(&self, raw: bool) -> Option<&[TermVector]> {
        if raw {
            self.raw.as_deref()
        } else {
            Some(&self.vectors)
        }
    }
}

pub fn parse_store(text: &str) -> Result<VectorStore, FormatError> {
    let mut lines = numbered(text);
    let meta = parse_meta(&mut lines)?;
    let mut seen = BTreeSet::new();
    let mut vectors = Vec::new();
    let mut raws = Vec::new();
    for (no, text) in lines {
        let parsed: StoreLineIn = serde_json::from_str(&text).map_err(|e| malformed(no, e))?;
        let line = StoreLine {
            term_id: parsed.term_id,
            term: parsed.term,
            concept: parsed.concept,
            vector: floats(no, parsed.vector)?,
            normalized: parsed.normalized,
            raw: parsed.raw.map(|r| floats(no, r)).transpose()?,
        };
        for v in std::iter::once(&line.vector).chain(line.raw.as_ref()) {
            if v.len() != meta.dim {
                return Err(FormatError::DimMismatch { line: no, expected: meta.dim, found: v.len() });
            }
        }
        if !seen.insert(line.term_id.clone()) {
            return Err(FormatError::DuplicateTermId { line: no, term_id: line.term_id });
        }
        let tv = TermVector {
            term_id: line.term_id,
            term: line.term,
            concept_label: line.concept,
            vector: line.vector,
            normalized: line.normalized,
        };
        validate_store(std::slice::from_ref(&tv)).map_err(|e| map_record_error(no, e))?;
        raws.push(line.raw.map(|r| TermVector { vector: r, normalized: false, ..tv.clone() }));
        vectors.push(tv);
    }
    let raw = if !raws.is_empty() && raws.iter().all(Option::is_some) {
        Some(raws.into_iter().flatten().collect())
    } else {
        None
    };
    Ok(VectorStore { meta, vectors, raw })
}

/// Renders a store. `raw`, when given, must align with `vectors`.
pub fn render_store(meta: &Meta, vectors: &[TermVector], raw: Option<&[TermVector]>) -> String {
    let mut s = serde_json::to_string(meta).expect("meta serializes");
    s.push('\n');
    for (i, v) in vectors.iter().enumerate() {
        let line = StoreLine {
            term_id: v.term_id.clone(),
            term: v.term.clone(),
            concept: v.concept_label.clone(),
            vector: v.vector.clone(),
            normalized: v.normalized,
            raw: raw.map(|r| r[i].vector.clone()),
        };
        s.push_str(&serde_json::to_string(&line).expect("finite vectors serialize"));
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub term_id: String,
    pub term: String,
    pub concept: String,
    pub x: f64,
    pub y: f64,
}

/// CSV with header `term_id,term,concept,x,y`, rows in projection order.
pub fn render_projection_csv(projection: &Projection2D, vectors: &[TermVector]) -> Result<String, FormatError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for ((id, c), v) in projection.ids.iter().zip(&projection.coords).zip(vectors) {
        w.serialize(ProjectionRow {
            term_id: id.clone(),
            term: v.term.clone(),
            concept: v.concept_label.clone().unwrap_or_default(),
            x: c[0],
            y: c[1],
        })
        .map_err(|e| FormatError::Csv(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| FormatError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_projection_csv(text: &str) -> Result<Vec<ProjectionRow>, FormatError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rows =
        r.deserialize().collect::<Result<Vec<ProjectionRow>, _>>().map_err(|e| FormatError::Csv(e.to_string()))?;
    if let Some(bad) = rows.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(FormatError::NonFiniteValue { line: bad + 2, term_id: rows[bad].term_id.clone() });
    }
    Ok(rows)
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Directed star graph per cluster: the parent points at each other member.
pub fn render_dot(tree: &ParentTree) -> String {
    let mut s = String::from("digraph parent_tree {\n  node [shape=box];\n");
    for (c, cluster) in tree.clusters.iter().enumerate() {
        let _ = writeln!(s, "  subgraph cluster_{c} {{");
        let _ = writeln!(s, "    label={};", dot_quote(&cluster.label));
        for (m, member) in cluster.members.iter().enumerate() {
            let style = if *member == cluster.parent { ", style=bold" } else { "" };
            let _ = writeln!(s, "    n{c}_{m} [label={}{style}];", dot_quote(member));
        }
        let parent = cluster.members.iter().position(|m| *m == cluster.parent).unwrap_or(0);
        for m in (0..cluster.members.len()).filter(|&m| m != parent) {
            let _ = writeln!(s, "    n{c}_{parent} -> n{c}_{m};");
        }
        s.push_str("  }\n");
    }
    s.push_str("}\n");
    s
}

/// Two aligned columns, concept then elected term.
pub fn render_concept_table(report: &ConceptReport) -> String {
    let width = report.rows.iter().map(|r| r.concept_label.chars().count()).max().unwrap_or(0).max(7);
    let mut s = format!("{:<width$}  Term\n", "Concept");
    for r in &report.rows {
        let _ = writeln!(s, "{:<width$}  {}", r.concept_label, r.canonical_term);
    }
    s
}

/// Tab-separated corpus with the three required columns. Tabs and line
/// breaks inside fields are replaced by spaces.
pub fn render_corpus_tsv(records: &[MentionRecord]) -> String {
    let clean = |f: &str| f.replace(['\t', '\n', '\r'], " ");
    let mut s = format!("{EXAMPLE_COLUMN}\t{TERM_COLUMN}\t{LABEL_COLUMN}\n");
    for r in records {
        let _ = writeln!(s, "{}\t{}\t{}", clean(&r.example), clean(&r.term), clean(&r.concept_label));
    }
    s
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}
