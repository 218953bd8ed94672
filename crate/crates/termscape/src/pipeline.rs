//! Pipeline steps shared by the CLI and the HTTP service, so both produce the
//! same artifacts from the same inputs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use termscape_core::cluster::{
    build_parent_tree, kmeans_restarts, unit_rows, ClusterError, ClusteredGroup, GroupLabel, KMeansParams,
};
use termscape_core::corpus::{build_concept_index, parse_corpus};
use termscape_core::evaluate::{concept_report, purity, separation_report, ConceptReport, SeparationReport};
use termscape_core::reduce::{pca, umap, Projection2D, UmapParams};
use termscape_core::session::AnnotationSession;
use termscape_core::vecstore::build_store;
use termscape_core::{ClusterModel, ConceptIndex, ParentTree, TermVector, TokenEmbeddingRecord};

use crate::error::{Result, WorkbenchError};
use crate::formats::Meta;

/// Corpus text to concept index, rejected rows included.
pub fn ingest(text: &str) -> Result<ConceptIndex> {
    let parsed = parse_corpus(text)?;
    let mut index = build_concept_index(&parsed.records);
    index.rejects = parsed.rejects;
    Ok(index)
}

/// Pooled and normalized store with the raw sums kept alongside.
pub struct Pooled {
    pub meta: Meta,
    pub normalized: Vec<TermVector>,
    pub raw: Vec<TermVector>,
}

pub fn pool(token_meta: &Meta, records: &[TokenEmbeddingRecord]) -> Result<Pooled> {
    let store = build_store(records)?;
    let mut meta = Meta::new(token_meta.dim, token_meta.model.clone());
    meta.extra = token_meta.extra.clone();
    meta.extra.insert("pooling".into(), Value::from("sum"));
    meta.extra.insert("normalized".into(), Value::from(true));
    Ok(Pooled { meta, normalized: store.normalized, raw: store.raw })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Umap,
    Pca,
}

pub fn rows(vectors: &[TermVector]) -> termscape_core::Matrix {
    let rows: Vec<&[f64]> = vectors.iter().map(|v| v.vector.as_slice()).collect();
    termscape_core::Matrix::from_rows(&rows).unwrap_or_else(|| termscape_core::Matrix::zeros(0, 0))
}

pub fn project(vectors: &[TermVector], method: Method, params: &UmapParams) -> Result<Projection2D> {
    let ids = vectors.iter().map(|v| v.term_id.clone()).collect();
    let x = rows(vectors);
    Ok(match method {
        Method::Umap => umap::project(ids, &x, params)?,
        Method::Pca => pca::project(ids, &x)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterSettings {
    /// `None`: 1 per annotated group, else the number of gold concepts.
    pub k: Option<usize>,
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for ClusterSettings {
    fn default() -> Self {
        let p = KMeansParams::new(1, 42);
        Self { k: None, seed: p.seed, restarts: 10, max_iters: p.max_iters, tol: p.tol }
    }
}

/// The k-means result for one clustered set of terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupModel {
    /// `None` when the whole store was clustered.
    pub group_id: Option<String>,
    /// Human label of the group, if any.
    pub label: Option<String>,
    /// Clustered terms in store order; aligned with `model.assignments`.
    pub term_ids: Vec<String>,
    pub params: KMeansParams,
    pub restarts: usize,
    pub model: ClusterModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterOutput {
    pub settings: ClusterSettings,
    pub groups: Vec<GroupModel>,
    /// Against gold labels, when every clustered term has one.
    pub purity: Option<f64>,
}

fn gold_k(vectors: &[TermVector], index: Option<&ConceptIndex>) -> usize {
    match index {
        Some(i) if i.n_concepts() > 0 => i.n_concepts(),
        _ => vectors.iter().filter_map(|v| v.concept_label.as_deref()).collect::<BTreeSet<_>>().len().max(1),
    }
}

/// Clusters every annotated group of `session` (or only `group_id`), or the
/// whole store when there is no annotation to work from.
pub fn cluster(
    store: &[TermVector],
    index: Option<&ConceptIndex>,
    session: Option<&AnnotationSession>,
    group_id: Option<&str>,
    settings: &ClusterSettings,
) -> Result<ClusterOutput> {
    // (group id, label, members, k)
    type Set<'a> = (Option<String>, Option<String>, Vec<&'a TermVector>, usize);
    let mut sets: Vec<Set<'_>> = Vec::new();
    let annotated = session.filter(|s| !s.groups.is_empty() || group_id.is_some());
    match annotated {
        Some(s) => {
            for (gid, members) in &s.groups {
                if group_id.is_some_and(|g| g != gid) || members.is_empty() {
                    continue;
                }
                let vs: Vec<&TermVector> = store.iter().filter(|v| members.contains(&v.term_id)).collect();
                sets.push((Some(gid.clone()), s.labels.get(gid).cloned(), vs, settings.k.unwrap_or(1)));
            }
            if let Some(g) = group_id {
                if sets.is_empty() {
                    return Err(termscape_core::session::SessionError::UnknownGroup(g.into()).into());
                }
            }
        }
        None => {
            let vs: Vec<&TermVector> = store.iter().collect();
            sets.push((None, None, vs, settings.k.unwrap_or_else(|| gold_k(store, index))));
        }
    }

    let mut groups = Vec::with_capacity(sets.len());
    for (gid, label, vs, k) in sets {
        let owned: Vec<TermVector> = vs.into_iter().cloned().collect();
        let params =
            KMeansParams { max_iters: settings.max_iters, tol: settings.tol, ..KMeansParams::new(k, settings.seed) };
        let model = kmeans_restarts(&unit_rows(&owned)?, &params, settings.restarts)?;
        groups.push(GroupModel {
            group_id: gid,
            label,
            term_ids: owned.iter().map(|v| v.term_id.clone()).collect(),
            params,
            restarts: settings.restarts.max(1),
            model,
        });
    }

    let by_id: BTreeMap<&str, &TermVector> = store.iter().map(|v| (v.term_id.as_str(), v)).collect();
    let mut clusters = Vec::new();
    let mut gold = Vec::new();
    for (g, gm) in groups.iter().enumerate() {
        for (id, &c) in gm.term_ids.iter().zip(&gm.model.assignments) {
            clusters.push((g, c));
            gold.push(by_id[id.as_str()].concept_label.clone());
        }
    }
    let purity =
        if !gold.is_empty() && gold.iter().all(Option::is_some) { Some(purity(&clusters, &gold)?) } else { None };
    Ok(ClusterOutput { settings: *settings, groups, purity })
}

/// Parent-node election for every cluster of a clustering run.
pub fn name(store: &[TermVector], output: &ClusterOutput) -> Result<ParentTree> {
    let by_id: BTreeMap<&str, &TermVector> = store.iter().map(|v| (v.term_id.as_str(), v)).collect();
    let mut owned = Vec::with_capacity(output.groups.len());
    for g in &output.groups {
        let vs =
            g.term_ids
                .iter()
                .map(|id| {
                    by_id.get(id.as_str()).map(|v| (*v).clone()).ok_or_else(|| {
                        WorkbenchError::Invalid(format!("clustered term {id} is not in the vector store"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
        if vs.len() != g.model.assignments.len() {
            return Err(
                ClusterError::LengthMismatch { vectors: vs.len(), assignments: g.model.assignments.len() }.into()
            );
        }
        owned.push(vs);
    }
    let clustered: Vec<ClusteredGroup<'_>> = output
        .groups
        .iter()
        .zip(&owned)
        .map(|(g, vs)| ClusteredGroup {
            group_id: g.group_id.clone(),
            label: if g.group_id.is_some() { GroupLabel::Annotated(g.label.clone()) } else { GroupLabel::Gold },
            vectors: vs,
            model: &g.model,
        })
        .collect();
    Ok(build_parent_tree(&clustered)?)
}

pub fn concepts(tree: &ParentTree) -> ConceptReport {
    concept_report(tree)
}

pub fn separation(index: &ConceptIndex, store: &[TermVector]) -> Result<SeparationReport> {
    Ok(separation_report(index, store)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use termscape_core::synth::{synth_fixture, SynthParams};

    fn fixture() -> (ConceptIndex, Vec<TermVector>) {
        let f = synth_fixture(&SynthParams { seed: 3, n_concepts: 3, terms_per_concept: 5, dim: 8, noise_sigma: 0.05 })
            .unwrap();
        let index = build_concept_index(&f.mentions);
        let pooled = pool(&Meta::new(8, "synthetic"), &f.tokens).unwrap();
        (index, pooled.normalized)
    }

    #[test]
    fn whole_store_uses_gold_k() {
        let (index, store) = fixture();
        let out = cluster(&store, Some(&index), None, None, &ClusterSettings::default()).unwrap();
        assert_eq!(out.groups.len(), 1);
        assert_eq!(out.groups[0].model.k(), 3);
        assert_eq!(out.purity, Some(1.0));
        let tree = name(&store, &out).unwrap();
        assert_eq!(tree.clusters.len(), 3);
        assert!(tree.clusters.iter().all(|c| c.parent.ends_with("synonym 00")));
    }

    #[test]
    fn annotated_groups_default_to_one_cluster() {
        let (_, store) = fixture();
        let ids: BTreeSet<String> = store.iter().map(|v| v.term_id.clone()).collect();
        let mut s = AnnotationSession::new("s", "", "");
        let first: Vec<String> = store[..5].iter().map(|v| v.term_id.clone()).collect();
        s.assign_terms(&ids, "g1", &first, "t", 0).unwrap();
        s.set_label("g1", "Headache", "t", 1).unwrap();
        let out = cluster(&store, None, Some(&s), None, &ClusterSettings::default()).unwrap();
        assert_eq!(out.groups.len(), 1);
        assert_eq!(out.groups[0].model.k(), 1);
        let tree = name(&store, &out).unwrap();
        assert_eq!(tree.clusters[0].label, "Headache");
        assert!(matches!(
            cluster(&store, None, Some(&s), Some("nope"), &ClusterSettings::default()),
            Err(WorkbenchError::Session(_))
        ));
    }
}
