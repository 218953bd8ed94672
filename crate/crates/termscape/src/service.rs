//! HTTP API over a loaded corpus index, vector store, projection and
//! annotation session.
//!
//! Loaded data is immutable. Session mutations are serialized by one async
//! mutex, so a failed request never changes the session version. Projections
//! are recomputed per request from explicit parameters; requests that do not
//! finish within the sync threshold answer `"status":"running"` and are
//! polled through `GET /api/project/{id}`.

use std::collections::{BTreeMap, BTreeSet};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex as StdMutex, OnceLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use termscape_core::evaluate::{separation_from_values, ConceptReport, SeparationReport};
use termscape_core::geometry::{bin_edges, concept_values, histogram, within_cross_values, Histogram, WithinCross};
use termscape_core::reduce::{InitMethod, Metric, ProjectionSource};
use termscape_core::session::SessionError;
use termscape_core::{AnnotationSession, ConceptIndex, ParentTree, TermVector, UmapParams};
use tokio::sync::Mutex;

use crate::atomic::{file_digest, sha256_hex};
use crate::error::{Result, WorkbenchError};
use crate::files::{load_index, load_projection, load_session, load_store, save_json, session_ref_warnings};
use crate::formats::{render_projection_csv, ProjectionRow, VectorStore};
use crate::pipeline::{self, ClusterOutput, ClusterSettings, Method};

/// Projection requests that finish within this answer synchronously.
pub const SYNC_THRESHOLD: Duration = Duration::from_secs(2);

/// Every `code` an [`ApiError`] can carry.
pub const ERROR_CODES: [&str; 10] = [
    "bad_request",
    "not_found",
    "unknown_term",
    "unknown_group",
    "unknown_concept",
    "unknown_projection",
    "invalid_params",
    "no_cluster_run",
    "io_error",
    "internal",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
    #[serde(skip)]
    pub status: StatusCode,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        debug_assert!(ERROR_CODES.contains(&code));
        Self { code, message: message.into(), detail: None, status }
    }

    fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }
}

impl From<WorkbenchError> for ApiError {
    fn from(e: WorkbenchError) -> Self {
        let message = e.to_string();
        match e {
            WorkbenchError::Session(SessionError::UnknownTerm(t)) => {
                Self::new(StatusCode::NOT_FOUND, "unknown_term", message).with_detail(json!({ "term_id": t }))
            }
            WorkbenchError::Session(SessionError::UnknownGroup(g)) => {
                Self::new(StatusCode::NOT_FOUND, "unknown_group", message).with_detail(json!({ "group_id": g }))
            }
            WorkbenchError::Session(_)
            | WorkbenchError::Reduce(_)
            | WorkbenchError::Cluster(_)
            | WorkbenchError::Invalid(_) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_params", message),
            WorkbenchError::Io { .. } => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "io_error", message),
            _ => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

type ApiResult<T> = std::result::Result<Json<T>, ApiError>;

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub store: PathBuf,
    pub projection: PathBuf,
    pub corpus: PathBuf,
    pub session: PathBuf,
}

/// Immutable inputs of a running service.
#[derive(Debug)]
pub struct Workspace {
    pub index: ConceptIndex,
    pub store: VectorStore,
    pub projection: Vec<ProjectionRow>,
    pub term_ids: BTreeSet<String>,
    pub corpus_digest: String,
    pub store_digest: String,
    pairs: OnceLock<std::result::Result<WithinCross, ApiError>>,
}

impl Workspace {
    pub fn new(
        index: ConceptIndex,
        store: VectorStore,
        projection: Vec<ProjectionRow>,
        corpus_digest: String,
        store_digest: String,
    ) -> Result<Self> {
        let term_ids: BTreeSet<String> = store.vectors.iter().map(|v| v.term_id.clone()).collect();
        if let Some(row) = projection.iter().find(|r| !term_ids.contains(&r.term_id)) {
            return Err(WorkbenchError::Invalid(format!("projection term {} is not in the vector store", row.term_id)));
        }
        Ok(Self { index, store, projection, term_ids, corpus_digest, store_digest, pairs: OnceLock::new() })
    }

    pub fn load(config: &ServeConfig) -> Result<Self> {
        Self::new(
            load_index(&config.corpus)?,
            load_store(&config.store)?,
            load_projection(&config.projection)?,
            file_digest(&config.corpus)?,
            file_digest(&config.store)?,
        )
    }

    fn pairs(&self) -> std::result::Result<&WithinCross, ApiError> {
        self.pairs
            .get_or_init(|| {
                within_cross_values(&self.index, &self.store.vectors).map_err(|e| WorkbenchError::from(e).into())
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

#[derive(Debug, Clone)]
enum Job {
    Running,
    Done { source: ProjectionSource, points: Arc<Vec<ProjectionRow>> },
    Failed(ApiError),
}

/// A clustering run kept for `/api/report` and the `cluster_id` of points.
#[derive(Debug, Clone)]
struct LastRun {
    output: ClusterOutput,
    tree: ParentTree,
}

pub struct AppState {
    pub data: Arc<Workspace>,
    session: Mutex<AnnotationSession>,
    session_path: PathBuf,
    last_run: StdMutex<Option<LastRun>>,
    jobs: StdMutex<BTreeMap<String, Job>>,
    sync_threshold: Duration,
}

impl AppState {
    pub fn new(data: Workspace, session: AnnotationSession, session_path: PathBuf) -> Self {
        Self {
            data: Arc::new(data),
            session: Mutex::new(session),
            session_path,
            last_run: StdMutex::new(None),
            jobs: StdMutex::new(BTreeMap::new()),
            sync_threshold: SYNC_THRESHOLD,
        }
    }

    pub fn with_sync_threshold(mut self, threshold: Duration) -> Self {
        self.sync_threshold = threshold;
        self
    }

    /// Loads inputs, then the session file if it exists (warning on content
    /// hash mismatch) or a fresh session bound to the current digests.
    pub fn load(config: &ServeConfig) -> Result<Self> {
        let data = Workspace::load(config)?;
        let session = if config.session.exists() {
            let s = load_session(&config.session)?;
            for w in session_ref_warnings(&s, Some(&data.corpus_digest), Some(&data.store_digest)) {
                tracing::warn!("{w}");
            }
            s
        } else {
            let id = config.session.file_stem().map_or_else(|| "session".into(), |s| s.to_string_lossy().into_owned());
            AnnotationSession::new(id, data.corpus_digest.clone(), data.store_digest.clone())
        };
        Ok(Self::new(data, session, config.session.clone()))
    }

    pub async fn session(&self) -> AnnotationSession {
        self.session.lock().await.clone()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/points", get(points))
        .route("/api/concepts", get(concepts))
        .route("/api/groups", post(assign_group))
        .route("/api/labels", post(set_label))
        .route("/api/project", post(start_projection))
        .route("/api/project/{id}", get(projection_status))
        .route("/api/cluster/run", post(run_cluster))
        .route("/api/report", get(report))
        .route("/api/report/separation", get(report_separation))
        .route("/api/report/concepts", get(report_concepts))
        .route("/api/histogram", get(histogram_scope))
        .route("/api/session", get(session_state))
        .route("/api/session/save", post(save_session))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .with_state(state)
}

pub async fn serve(config: ServeConfig, addr: SocketAddr) -> Result<()> {
    let state = Arc::new(AppState::load(&config)?);
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| WorkbenchError::io(addr.to_string(), e))?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(state)).await.map_err(|e| WorkbenchError::io(addr.to_string(), e))
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub term_id: String,
    pub term: String,
    pub concept: String,
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_id: Option<usize>,
}

/// Position in the parent tree of every clustered term; empty clusters are
/// skipped exactly as the tree skips them.
fn cluster_ids(output: &ClusterOutput) -> BTreeMap<&str, usize> {
    let mut out = BTreeMap::new();
    let mut next = 0;
    for g in &output.groups {
        let mut global = vec![None; g.model.k()];
        for (c, size) in g.model.sizes().into_iter().enumerate() {
            if size > 0 {
                global[c] = Some(next);
                next += 1;
            }
        }
        for (id, &c) in g.term_ids.iter().zip(&g.model.assignments) {
            if let Some(gc) = global[c] {
                out.insert(id.as_str(), gc);
            }
        }
    }
    out
}

#[derive(Debug, Deserialize)]
struct PointsQuery {
    projection: Option<String>,
}

async fn points(
    State(state): State<Arc<AppState>>,
    query: std::result::Result<Query<PointsQuery>, QueryRejection>,
) -> ApiResult<Vec<Point>> {
    let Query(query) = query?;
    let rows: Arc<Vec<ProjectionRow>> = match &query.projection {
        None => Arc::new(state.data.projection.clone()),
        Some(id) => match state.jobs.lock().expect("jobs lock").get(id) {
            Some(Job::Done { points, .. }) => points.clone(),
            Some(Job::Running) => {
                return Err(ApiError::new(
                    StatusCode::CONFLICT,
                    "unknown_projection",
                    format!("projection {id} is still running"),
                ))
            }
            Some(Job::Failed(e)) => return Err(e.clone()),
            None => {
                return Err(ApiError::new(StatusCode::NOT_FOUND, "unknown_projection", format!("no projection {id}")))
            }
        },
    };
    let session = state.session.lock().await.clone();
    let last = state.last_run.lock().expect("run lock").clone();
    let clusters = last.as_ref().map(|r| cluster_ids(&r.output)).unwrap_or_default();
    Ok(Json(
        rows.iter()
            .map(|r| Point {
                term_id: r.term_id.clone(),
                term: r.term.clone(),
                concept: r.concept.clone(),
                x: r.x,
                y: r.y,
                group_id: session.group_of(&r.term_id).map(str::to_owned),
                cluster_id: clusters.get(r.term_id.as_str()).copied(),
            })
            .collect(),
    ))
}

async fn concepts(State(state): State<Arc<AppState>>) -> Json<ConceptIndex> {
    Json(state.data.index.clone())
}

fn now_millis() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

fn default_actor() -> String {
    "studio".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupRequest {
    pub group_id: String,
    pub term_ids: Vec<String>,
    #[serde(default = "default_actor")]
    pub actor: String,
    /// Milliseconds since the Unix epoch; the server clock when absent.
    pub timestamp: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelRequest {
    pub group_id: String,
    pub label: String,
    #[serde(default = "default_actor")]
    pub actor: String,
    pub timestamp: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionResponse {
    pub version: u64,
}

async fn assign_group(
    State(state): State<Arc<AppState>>,
    body: std::result::Result<Json<GroupRequest>, JsonRejection>,
) -> ApiResult<VersionResponse> {
    let Json(req) = body?;
    let mut session = state.session.lock().await;
    let ts = req.timestamp.unwrap_or_else(now_millis);
    let version = session
        .assign_terms(&state.data.term_ids, &req.group_id, &req.term_ids, &req.actor, ts)
        .map_err(WorkbenchError::from)?;
    Ok(Json(VersionResponse { version }))
}

async fn set_label(
    State(state): State<Arc<AppState>>,
    body: std::result::Result<Json<LabelRequest>, JsonRejection>,
) -> ApiResult<VersionResponse> {
    let Json(req) = body?;
    let mut session = state.session.lock().await;
    let ts = req.timestamp.unwrap_or_else(now_millis);
    let version = session.set_label(&req.group_id, &req.label, &req.actor, ts).map_err(WorkbenchError::from)?;
    Ok(Json(VersionResponse { version }))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectRequest {
    pub method: Option<Method>,
    pub n_neighbors: Option<usize>,
    pub min_dist: Option<f64>,
    pub seed: Option<u64>,
    pub n_epochs: Option<usize>,
    pub metric: Option<Metric>,
    pub init: Option<InitMethod>,
    /// Project the unnormalized pooled sums.
    pub raw: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionStatus {
    pub projection_id: String,
    /// `running`, `done` or `failed`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<ProjectionSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<Value>,
}

fn resolve_projection(req: &ProjectRequest) -> (Method, UmapParams, bool) {
    let d = UmapParams::default();
    let params = UmapParams {
        n_neighbors: req.n_neighbors.unwrap_or(d.n_neighbors),
        min_dist: req.min_dist.unwrap_or(d.min_dist),
        seed: req.seed.unwrap_or(d.seed),
        n_epochs: req.n_epochs.unwrap_or(d.n_epochs),
        metric: req.metric.unwrap_or(d.metric),
        init: req.init.unwrap_or(d.init),
        ..d
    };
    (req.method.unwrap_or(Method::Umap), params, req.raw)
}

/// Same id for the same resolved request.
pub fn projection_id(method: Method, params: &UmapParams, raw: bool) -> String {
    let key = match method {
        Method::Umap => json!({ "method": method, "params": params, "raw": raw }),
        Method::Pca => json!({ "method": method, "raw": raw }),
    };
    format!("p{}", &sha256_hex(key.to_string().as_bytes())[..16])
}

fn compute_projection(data: &Workspace, method: Method, params: &UmapParams, raw: bool) -> Job {
    let run = || -> Result<Job> {
        let vectors: &[TermVector] =
            data.store.select(raw).ok_or_else(|| WorkbenchError::Invalid("store has no raw vectors".into()))?;
        let projection = pipeline::project(vectors, method, params)?;
        let csv = render_projection_csv(&projection, vectors).map_err(|e| WorkbenchError::format("<projection>", e))?;
        let points =
            crate::formats::parse_projection_csv(&csv).map_err(|e| WorkbenchError::format("<projection>", e))?;
        Ok(Job::Done { source: projection.source, points: Arc::new(points) })
    };
    run().unwrap_or_else(|e| Job::Failed(e.into()))
}

fn job_status(id: &str, job: &Job) -> ProjectionStatus {
    let (status, source, error) = match job {
        Job::Running => ("running", None, None),
        Job::Done { source, .. } => ("done", Some(source.clone()), None),
        Job::Failed(e) => ("failed", None, Some(serde_json::to_value(e).expect("error serializes"))),
    };
    ProjectionStatus { projection_id: id.into(), status: status.into(), source, error }
}

async fn start_projection(
    State(state): State<Arc<AppState>>,
    body: std::result::Result<Json<ProjectRequest>, JsonRejection>,
) -> ApiResult<ProjectionStatus> {
    let Json(req) = body?;
    let (method, params, raw) = resolve_projection(&req);
    if method == Method::Umap {
        params.validate(state.data.store.vectors.len()).map_err(WorkbenchError::from)?;
    }
    let id = projection_id(method, &params, raw);
    {
        let mut jobs = state.jobs.lock().expect("jobs lock");
        match jobs.get(&id) {
            Some(Job::Failed(_)) | None => {
                jobs.insert(id.clone(), Job::Running);
            }
            Some(job) => return Ok(Json(job_status(&id, job))),
        }
    }
    let task_state = state.clone();
    let task_id = id.clone();
    let mut handle = tokio::task::spawn_blocking(move || {
        let job = compute_projection(&task_state.data, method, &params, raw);
        task_state.jobs.lock().expect("jobs lock").insert(task_id, job);
    });
    let _ = tokio::time::timeout(state.sync_threshold, &mut handle).await;
    let jobs = state.jobs.lock().expect("jobs lock");
    Ok(Json(job_status(&id, &jobs[&id])))
}

async fn projection_status(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<ProjectionStatus> {
    let jobs = state.jobs.lock().expect("jobs lock");
    match jobs.get(&id) {
        Some(job) => Ok(Json(job_status(&id, job))),
        None => Err(ApiError::new(StatusCode::NOT_FOUND, "unknown_projection", format!("no projection {id}"))),
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterRequest {
    pub group_id: Option<String>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
}

impl ClusterRequest {
    pub fn settings(&self) -> ClusterSettings {
        let d = ClusterSettings::default();
        ClusterSettings {
            k: self.k,
            seed: self.seed.unwrap_or(d.seed),
            restarts: self.restarts.unwrap_or(d.restarts),
            ..d
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub group_id: Option<String>,
    pub label: Option<String>,
    pub k: usize,
    pub n_terms: usize,
    pub sizes: Vec<usize>,
    pub objective: f64,
    pub iterations_run: usize,
    pub converged: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRunResponse {
    pub session_version: u64,
    pub settings: ClusterSettings,
    pub purity: Option<f64>,
    pub models: Vec<ModelSummary>,
    /// Parent term of every cluster.
    pub tree: ParentTree,
}

impl ClusterRunResponse {
    pub fn new(session_version: u64, output: &ClusterOutput, tree: ParentTree) -> Self {
        let models = output
            .groups
            .iter()
            .map(|g| ModelSummary {
                group_id: g.group_id.clone(),
                label: g.label.clone(),
                k: g.model.k(),
                n_terms: g.term_ids.len(),
                sizes: g.model.sizes(),
                objective: g.model.objective,
                iterations_run: g.model.iterations_run,
                converged: g.model.converged,
                seed: g.model.seed,
            })
            .collect();
        Self { session_version, settings: output.settings, purity: output.purity, models, tree }
    }
}

async fn run_cluster(
    State(state): State<Arc<AppState>>,
    body: std::result::Result<Json<ClusterRequest>, JsonRejection>,
) -> ApiResult<ClusterRunResponse> {
    let Json(req) = body?;
    let session = state.session.lock().await.clone();
    let data = state.data.clone();
    let settings = req.settings();
    let group = req.group_id.clone();
    let (output, tree) = tokio::task::spawn_blocking(move || -> Result<(ClusterOutput, ParentTree)> {
        let output =
            pipeline::cluster(&data.store.vectors, Some(&data.index), Some(&session), group.as_deref(), &settings)?;
        let tree = pipeline::name(&data.store.vectors, &output)?;
        Ok((output, tree))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    let version = state.session.lock().await.version;
    let response = ClusterRunResponse::new(version, &output, tree.clone());
    *state.last_run.lock().expect("run lock") = Some(LastRun { output, tree });
    Ok(Json(response))
}

fn separation(state: &AppState) -> std::result::Result<SeparationReport, ApiError> {
    let pairs = state.data.pairs()?;
    separation_from_values(&pairs.within, &pairs.cross, pairs.n_terms).map_err(|e| WorkbenchError::from(e).into())
}

fn last_concepts(state: &AppState) -> Option<ConceptReport> {
    state.last_run.lock().expect("run lock").as_ref().map(|r| pipeline::concepts(&r.tree))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullReport {
    pub separation: SeparationReport,
    /// From the most recent `/api/cluster/run`, if any.
    pub concepts: Option<ConceptReport>,
}

async fn report(State(state): State<Arc<AppState>>) -> ApiResult<FullReport> {
    Ok(Json(FullReport { separation: separation(&state)?, concepts: last_concepts(&state) }))
}

async fn report_separation(State(state): State<Arc<AppState>>) -> ApiResult<SeparationReport> {
    Ok(Json(separation(&state)?))
}

async fn report_concepts(State(state): State<Arc<AppState>>) -> ApiResult<ConceptReport> {
    last_concepts(&state)
        .map(Json)
        .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "no_cluster_run", "run /api/cluster/run first"))
}

#[derive(Debug, Deserialize)]
struct HistogramQuery {
    scope: String,
}

/// All-zero histogram for a scope without pairs.
pub fn empty_histogram() -> Histogram {
    let edges = bin_edges();
    Histogram { counts: vec![0; edges.len() - 1], bin_edges: edges, n: 0, mean: 0.0, std: 0.0 }
}

async fn histogram_scope(
    State(state): State<Arc<AppState>>,
    query: std::result::Result<Query<HistogramQuery>, QueryRejection>,
) -> ApiResult<Histogram> {
    let Query(q) = query?;
    let owned;
    let values: &[f64] = match q.scope.as_str() {
        "within" => &state.data.pairs()?.within,
        "cross" => &state.data.pairs()?.cross,
        scope => match scope.strip_prefix("concept:") {
            Some(label) if state.data.index.concepts.contains_key(label) => {
                owned = concept_values(&state.data.index, &state.data.store.vectors, label)
                    .map_err(|e| ApiError::from(WorkbenchError::from(e)))?;
                &owned
            }
            Some(label) => {
                return Err(ApiError::new(StatusCode::NOT_FOUND, "unknown_concept", format!("no concept {label:?}")))
            }
            None => {
                return Err(ApiError::new(
                    StatusCode::BAD_REQUEST,
                    "bad_request",
                    "scope must be within, cross or concept:<label>",
                ))
            }
        },
    };
    if values.is_empty() {
        return Ok(Json(empty_histogram()));
    }
    histogram(values).map(Json).map_err(|e| WorkbenchError::from(e).into())
}

async fn session_state(State(state): State<Arc<AppState>>) -> Json<AnnotationSession> {
    Json(state.session().await)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaveResponse {
    pub path: String,
    pub version: u64,
}

async fn save_session(State(state): State<Arc<AppState>>) -> ApiResult<SaveResponse> {
    let session = state.session.lock().await;
    save_json(&state.session_path, &*session)?;
    Ok(Json(SaveResponse { path: display(&state.session_path), version: session.version }))
}

fn display(path: &Path) -> String {
    path.display().to_string()
}
