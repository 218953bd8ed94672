//! Spherical k-means, parent-node election and the parent/synonym star graph.
//!
//! Points are unit vectors and similarity is cosine, so the assignment step
//! is an argmax of dot products and a centroid is the normalized mean of its
//! members. The objective is `Σ (1 - cos(point, centroid))`. Lloyd phases
//! alternate with chains of single-point transfers, which escape many of the
//! local minima Lloyd alone settles in.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::cosine;
use crate::linalg::{dot, norm, Matrix};
use crate::seed::{derive_seed, rng_from_seed};
use crate::vecstore::TermVector;

/// Unit-norm tolerance for inputs and centroids.
pub const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("k = {k} exceeds the number of points ({n})")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("point {0} is not unit norm")]
    NotNormalized(usize),
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("cluster id {0} out of range")]
    UnknownCluster(usize),
    #[error("{vectors} vectors for {assignments} assignments")]
    LengthMismatch { vectors: usize, assignments: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KMeansInit {
    KmeansPp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub tol: f64,
    pub init: KMeansInit,
}

impl KMeansParams {
    pub fn new(k: usize, seed: u64) -> Self {
        Self { k, seed, max_iters: 100, tol: 1e-6, init: KMeansInit::KmeansPp }
    }
}

pub const DEFAULT_RESTARTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub objective: f64,
    pub iterations_run: usize,
    pub converged: bool,
    /// Objective after seeding, then after every Lloyd iteration.
    pub history: Vec<f64>,
    /// Seed of the run that produced this model.
    pub seed: u64,
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignments.iter().enumerate().filter(move |(_, &c)| c == cluster).map(|(i, _)| i)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k()];
        for &c in &self.assignments {
            s[c] += 1;
        }
        s
    }
}

fn check_points(points: &Matrix, k: usize) -> Result<(), ClusterError> {
    if k == 0 {
        return Err(ClusterError::ZeroK);
    }
    if k > points.nrows() {
        return Err(ClusterError::KTooLarge { k, n: points.nrows() });
    }
    for (i, p) in points.rows_iter().enumerate() {
        if !((norm(p) - 1.0).abs() <= UNIT_TOL) {
            return Err(ClusterError::NotNormalized(i));
        }
    }
    Ok(())
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (c, cen) in centroids.iter().enumerate() {
        let s = dot(p, cen);
        if s > best.1 {
            best = (c, s);
        }
    }
    best
}

/// k-means++ with `D(x) = 1 - max cos(x, chosen)` and weights `D(x)^2`.
fn seed_centroids(points: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.nrows();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points.row(first).to_vec()];
    let mut best_sim: Vec<f64> = points.rows_iter().map(|p| dot(p, points.row(first))).collect();

    while centroids.len() < k {
        let weights: Vec<f64> = best_sim
            .iter()
            .zip(&chosen)
            .map(|(s, &c)| {
                if c {
                    0.0
                } else {
                    let d = (1.0 - s).max(0.0);
                    d * d
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, w) in weights.iter().enumerate() {
                if *w > 0.0 {
                    pick = Some(i);
                    if r < *w {
                        break;
                    }
                    r -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            // Every remaining point duplicates a seed; take one uniformly.
            let rest: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            rest[rng.random_range(0..rest.len())]
        };
        chosen[pick] = true;
        let c = points.row(pick).to_vec();
        for (s, p) in best_sim.iter_mut().zip(points.rows_iter()) {
            *s = s.max(dot(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Assigns every point to its max-cosine centroid (ties to the lowest index)
/// and reseeds empty clusters with the worst-fit point.
fn assign(points: &Matrix, centroids: &mut [Vec<f64>], assignments: &mut [usize]) -> f64 {
    let k = centroids.len();
    let mut sims = vec![0.0; points.nrows()];
    for (i, p) in points.rows_iter().enumerate() {
        let (c, s) = nearest(p, centroids);
        assignments[i] = c;
        sims[i] = s;
    }
    let mut counts = vec![0usize; k];
    for &c in assignments.iter() {
        counts[c] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        // Worst fit among points whose cluster can spare one.
        let mut worst: Option<usize> = None;
        for i in 0..points.nrows() {
            if counts[assignments[i]] < 2 {
                continue;
            }
            if worst.is_none_or(|w| 1.0 - sims[i] > 1.0 - sims[w]) {
                worst = Some(i);
            }
        }
        let Some(w) = worst else { break };
        counts[assignments[w]] -= 1;
        counts[empty] = 1;
        assignments[w] = empty;
        centroids[empty] = points.row(w).to_vec();
        sims[w] = dot(points.row(w), &centroids[empty]);
    }
    sims.iter().map(|s| 1.0 - s).sum::<f64>().max(0.0)
}

/// Normalized mean of members; a cluster whose members cancel keeps its centroid.
fn update(points: &Matrix, centroids: &mut [Vec<f64>], assignments: &[usize]) {
    let d = points.ncols();
    let mut sums = vec![vec![0.0; d]; centroids.len()];
    for (p, &c) in points.rows_iter().zip(assignments) {
        for (s, v) in sums[c].iter_mut().zip(p) {
            *s += v;
        }
    }
    for (cen, sum) in centroids.iter_mut().zip(sums) {
        let n = norm(&sum);
        if n > 1e-12 {
            *cen = sum.into_iter().map(|v| v / n).collect();
        }
    }
}

/// Smallest objective improvement accepted for a transfer chain.
const TRANSFER_GAIN: f64 = 1e-12;
/// Longest chain of tentative single-point moves.
pub const CHAIN_LENGTH: usize = 20;

/// Objective-lowering sequence of single-point moves `(point, target)`.
///
/// With normalized-mean centroids the objective is `n - Σ_c ‖S_c‖`, so each
/// move is scored exactly from member sums. The chain greedily applies the
/// best move among points not yet moved, even if it raises the objective,
/// and keeps the prefix with the largest total gain. Clusters are never
/// emptied; ties go to the lowest point, then the lowest cluster.
fn transfer_chain(points: &Matrix, assignments: &[usize], k: usize) -> Vec<(usize, usize)> {
    let d = points.ncols();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.rows_iter().zip(assignments) {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(p) {
            *s += v;
        }
    }
    let mut norms: Vec<f64> = sums.iter().map(|s| norm(s)).collect();
    let mut current = assignments.to_vec();
    let mut moved = vec![false; current.len()];
    let mut chain = Vec::new();
    let (mut total, mut best_total, mut best_len) = (0.0, TRANSFER_GAIN, 0);
    let mut shifted = vec![0.0; d];

    for _ in 0..CHAIN_LENGTH.min(current.len()) {
        let mut step: Option<(usize, usize, f64)> = None;
        for (i, p) in points.rows_iter().enumerate() {
            let from = current[i];
            if moved[i] || counts[from] < 2 {
                continue;
            }
            for ((o, s), v) in shifted.iter_mut().zip(&sums[from]).zip(p) {
                *o = s - v;
            }
            let left = norm(&shifted) - norms[from];
            for to in (0..k).filter(|&c| c != from) {
                for ((o, s), v) in shifted.iter_mut().zip(&sums[to]).zip(p) {
                    *o = s + v;
                }
                let gain = left + norm(&shifted) - norms[to];
                if step.is_none_or(|(_, _, g)| gain > g) {
                    step = Some((i, to, gain));
                }
            }
        }
        let Some((i, to, gain)) = step else { break };
        let from = current[i];
        for (j, v) in points.row(i).iter().enumerate() {
            sums[from][j] -= v;
            sums[to][j] += v;
        }
        norms[from] = norm(&sums[from]);
        norms[to] = norm(&sums[to]);
        counts[from] -= 1;
        counts[to] += 1;
        current[i] = to;
        moved[i] = true;
        chain.push((i, to));
        total += gain;
        if total > best_total {
            best_total = total;
            best_len = chain.len();
        }
    }
    chain.truncate(best_len);
    chain
}

/// Single seeded run of spherical k-means: k-means++ seeding, Lloyd updates,
/// then transfer chains between Lloyd phases.
///
/// A Lloyd phase stops when assignments repeat, when the objective drops by
/// less than `tol`, or after `max_iters` iterations. When a phase settles,
/// an improving [`transfer_chain`] is applied and Lloyd resumes; the run ends
/// once no chain improves the objective. `converged` is false only
/// if `max_iters` cut a phase short.
pub fn kmeans_fit(points: &Matrix, params: &KMeansParams) -> Result<ClusterModel, ClusterError> {
    check_points(points, params.k)?;
    let mut rng = rng_from_seed(params.seed);
    let mut centroids = seed_centroids(points, params.k, &mut rng);
    let mut assignments = vec![0usize; points.nrows()];
    let mut objective = assign(points, &mut centroids, &mut assignments);
    let mut history = vec![objective];
    let mut converged = false;
    let mut iterations_run = 0;

    let mut next = assignments.clone();
    for _transfer in 0..=params.max_iters {
        converged = false;
        for _ in 0..params.max_iters {
            iterations_run += 1;
            update(points, &mut centroids, &assignments);
            let new_objective = assign(points, &mut centroids, &mut next);
            history.push(new_objective);
            let unchanged = next == assignments;
            core::mem::swap(&mut assignments, &mut next);
            let decrease = objective - new_objective;
            objective = new_objective;
            if unchanged || decrease < params.tol {
                converged = true;
                break;
            }
        }
        if !converged {
            break;
        }
        let chain = transfer_chain(points, &assignments, params.k);
        if chain.is_empty() {
            break;
        }
        for (i, to) in chain {
            assignments[i] = to;
        }
    }
    Ok(ClusterModel { centroids, assignments, objective, iterations_run, converged, history, seed: params.seed })
}

/// Best of `restarts` runs (seeds derived from `params.seed`); objective ties
/// go to the lowest restart index.
pub fn kmeans_restarts(points: &Matrix, params: &KMeansParams, restarts: usize) -> Result<ClusterModel, ClusterError> {
    let mut best: Option<ClusterModel> = None;
    for r in 0..restarts.max(1) {
        let run = KMeansParams { seed: derive_seed(params.seed, r as u64), ..*params };
        let model = kmeans_fit(points, &run)?;
        if best.as_ref().is_none_or(|b| model.objective < b.objective) {
            best = Some(model);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Unit-normalized matrix of term vectors, one row per term.
pub fn unit_rows(vectors: &[TermVector]) -> Result<Matrix, ClusterError> {
    let rows: Vec<Vec<f64>> = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let n = norm(&v.vector);
            if n > 1e-12 {
                Ok(v.vector.iter().map(|x| x / n).collect())
            } else {
                Err(ClusterError::NotNormalized(i))
            }
        })
        .collect::<Result<_, _>>()?;
    Matrix::from_rows(&rows).ok_or(ClusterError::LengthMismatch { vectors: rows.len(), assignments: 0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Election {
    /// Position of the elected term in the clustered vectors.
    pub index: usize,
    pub term: String,
    pub cosine: f64,
}

/// The member with maximum cosine to the centroid; ties go to the
/// lexicographically smallest term. `vectors` aligns with `model.assignments`.
pub fn canonical_term(model: &ClusterModel, cluster: usize, vectors: &[TermVector]) -> Result<Election, ClusterError> {
    if vectors.len() != model.assignments.len() {
        return Err(ClusterError::LengthMismatch { vectors: vectors.len(), assignments: model.assignments.len() });
    }
    let centroid = model.centroids.get(cluster).ok_or(ClusterError::UnknownCluster(cluster))?;
    let mut best: Option<Election> = None;
    for i in model.members(cluster) {
        let c = cosine(&vectors[i].vector, centroid).map_err(|_| ClusterError::NotNormalized(i))?;
        let better = match &best {
            None => true,
            Some(b) => c > b.cosine || (c == b.cosine && vectors[i].term < b.term),
        };
        if better {
            best = Some(Election { index: i, term: vectors[i].term.clone(), cosine: c });
        }
    }
    best.ok_or(ClusterError::EmptyCluster(cluster))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    Annotation,
    Gold,
    /// No label was available; the parent term stands in.
    ParentFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParentCluster {
    pub label: String,
    pub parent: String,
    /// All terms of the cluster, parent included, in input order.
    pub members: Vec<String>,
    pub group_id: Option<String>,
    pub cluster_id: usize,
    pub label_source: LabelSource,
    /// Cosine of the parent to its centroid.
    pub centroid_cosine: f64,
}

impl ParentCluster {
    /// Star edges `parent -> member` for every non-parent member.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.members.iter().filter(move |m| **m != self.parent).map(move |m| (self.parent.as_str(), m.as_str()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParentTree {
    pub clusters: Vec<ParentCluster>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// A clustered group: the vectors that were clustered, the model, and how
/// each cluster should be labeled.
#[derive(Debug, Clone)]
pub struct ClusteredGroup<'a> {
    pub group_id: Option<String>,
    pub label: GroupLabel,
    pub vectors: &'a [TermVector],
    pub model: &'a ClusterModel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroupLabel {
    /// Human label for the whole group.
    Annotated(Option<String>),
    /// Majority gold concept of each cluster's members.
    Gold,
}

fn majority_gold(vectors: &[TermVector], members: &[usize]) -> Option<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for &i in members {
        if let Some(l) = &vectors[i].concept_label {
            *counts.entry(l.as_str()).or_default() += 1;
        }
    }
    // BTreeMap order makes ties resolve to the smallest label.
    let mut best: Option<(&str, usize)> = None;
    for (l, c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((l, c));
        }
    }
    best.map(|(l, _)| String::from(l))
}

/// One star per non-empty cluster, parent = [`canonical_term`].
pub fn build_parent_tree(groups: &[ClusteredGroup<'_>]) -> Result<ParentTree, ClusterError> {
    let mut tree = ParentTree::default();
    for g in groups {
        for cluster in 0..g.model.k() {
            let members: Vec<usize> = g.model.members(cluster).collect();
            if members.is_empty() {
                continue;
            }
            let elected = canonical_term(g.model, cluster, g.vectors)?;
            let (label, source) = match &g.label {
                GroupLabel::Annotated(Some(l)) => (Some(l.clone()), LabelSource::Annotation),
                GroupLabel::Annotated(None) => (None, LabelSource::ParentFallback),
                GroupLabel::Gold => (majority_gold(g.vectors, &members), LabelSource::Gold),
            };
            let (label, source) = match label {
                Some(l) => (l, source),
                None => {
                    tree.warnings.push(format!(
                        "unlabeled group {}: using parent term {:?} as label",
                        g.group_id.as_deref().unwrap_or("<all>"),
                        elected.term
                    ));
                    (elected.term.clone(), LabelSource::ParentFallback)
                }
            };
            tree.clusters.push(ParentCluster {
                label,
                parent: elected.term.clone(),
                members: members.iter().map(|&i| g.vectors[i].term.clone()).collect(),
                group_id: g.group_id.clone(),
                cluster_id: cluster,
                label_source: source,
                centroid_cosine: elected.cosine,
            });
        }
    }
    Ok(tree)
}
