//! Command-line driver. Exit codes: 0 success, 1 usage or contract error,
//! 2 IO error. Every command writes its outputs atomically plus a
//! `<output>.provenance.json` sidecar with the resolved settings and the
//! SHA-256 of every input.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use termscape_core::reduce::{sweep, InitMethod, Metric, ProjectionSource, DEFAULT_MIN_DIST, DEFAULT_N_NEIGHBORS};
use termscape_core::synth::{synth_fixture, SynthParams};
use termscape_core::Projection2D;

use crate::atomic::{file_digest, read_to_string, write_atomic};
use crate::config::{KMeansConfig, PipelineConfig, UmapConfig};
use crate::error::{Result, WorkbenchError};
use crate::files::{self, load_index, load_json, load_session, load_store, load_tokens, save_json};
use crate::formats::{self, Meta};
use crate::pipeline::{self, ClusterOutput, Method};
use crate::service::{self, ServeConfig};

#[derive(Debug, Parser)]
#[command(name = "termscape", version, about = "Concept-normalization workbench: corpus to canonical terms")]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a tab-separated mention corpus into a concept index.
    Ingest(IngestArgs),
    /// Sum-pool token vectors per term and L2-normalize them.
    Pool(PoolArgs),
    /// Project term vectors to 2-D with UMAP or PCA.
    Project(ProjectArgs),
    /// UMAP over a grid of n_neighbors x min_dist.
    Sweep(SweepArgs),
    /// Spherical k-means over the store or over annotated groups.
    Cluster(ClusterArgs),
    /// Elect the parent term of every cluster.
    Name(NameArgs),
    /// Within/cross-concept similarity report and concept table.
    Report(ReportArgs),
    /// Write a synthetic corpus and token-embedding file.
    Synth(SynthArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Tab-separated corpus with Example, Term and General SNOMED Label columns.
    #[arg(long, value_name = "TSV")]
    pub input: PathBuf,
    /// Concept index JSON [config: paths.corpus].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PoolArgs {
    /// Token-embedding JSON lines [config: paths.tokens].
    #[arg(long)]
    pub tokens: Option<PathBuf>,
    /// Vector store JSON lines [config: paths.store].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn serde_value<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(Value::String(s.to_owned())).map_err(|e| e.to_string())
}

/// UMAP settings other than the two swept ones.
#[derive(Debug, Clone, Default, Args)]
pub struct LayoutFlags {
    #[arg(long)]
    pub n_epochs: Option<usize>,
    #[arg(long)]
    pub negative_sample_rate: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// cosine or euclidean.
    #[arg(long, value_parser = serde_value::<Metric>)]
    pub metric: Option<Metric>,
    /// spectral or random.
    #[arg(long, value_parser = serde_value::<InitMethod>)]
    pub init: Option<InitMethod>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl LayoutFlags {
    fn umap(&self, n_neighbors: Option<usize>, min_dist: Option<f64>) -> UmapConfig {
        UmapConfig {
            n_neighbors,
            min_dist,
            n_epochs: self.n_epochs,
            negative_sample_rate: self.negative_sample_rate,
            initial_learning_rate: self.learning_rate,
            metric: self.metric,
            init: self.init,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Vector store [config: paths.store].
    #[arg(long, visible_alias = "store")]
    pub vectors: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Method::Umap)]
    pub method: Method,
    #[arg(long)]
    pub n_neighbors: Option<usize>,
    #[arg(long)]
    pub min_dist: Option<f64>,
    #[command(flatten)]
    pub layout: LayoutFlags,
    /// Project the unnormalized pooled sums instead of the unit vectors.
    #[arg(long)]
    pub raw: bool,
    /// Projection CSV [config: paths.projection].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Vector store [config: paths.store].
    #[arg(long, visible_alias = "store")]
    pub vectors: Option<PathBuf>,
    /// Comma-separated list [default: 5,15,50].
    #[arg(long, value_delimiter = ',')]
    pub n_neighbors: Vec<usize>,
    /// Comma-separated list [default: 0.01,0.1,0.5].
    #[arg(long, value_delimiter = ',')]
    pub min_dist: Vec<f64>,
    #[command(flatten)]
    pub layout: LayoutFlags,
    #[arg(long)]
    pub raw: bool,
    /// One CSV per pair is written here [config: paths.reports].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Vector store [config: paths.store].
    #[arg(long, visible_alias = "store")]
    pub vectors: Option<PathBuf>,
    /// Concept index, used for the default k [config: paths.corpus].
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Annotation session; its groups are clustered one by one [config: paths.session].
    #[arg(long)]
    pub session: Option<PathBuf>,
    /// Cluster only this group of the session.
    #[arg(long)]
    pub group: Option<String>,
    /// Clusters per group [default: 1 per annotated group, else the number of concepts].
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Cluster JSON [default: <paths.reports>/cluster.json].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NameArgs {
    /// Vector store [config: paths.store].
    #[arg(long, visible_alias = "store")]
    pub vectors: Option<PathBuf>,
    /// Output of `cluster`.
    #[arg(long)]
    pub cluster: PathBuf,
    /// Parent tree JSON [default: <paths.reports>/tree.json].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the tree as Graphviz DOT.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Also write the concept/term table as text.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Vector store [config: paths.store].
    #[arg(long, visible_alias = "vectors")]
    pub store: Option<PathBuf>,
    /// Concept index [config: paths.corpus].
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Separation JSON [default: <paths.reports>/separation.json].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output of `cluster`; adds the concept report.
    #[arg(long, requires = "concepts_out")]
    pub cluster: Option<PathBuf>,
    /// Concept report JSON; a `.txt` table is written next to it.
    #[arg(long, requires = "cluster")]
    pub concepts_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub concepts: usize,
    #[arg(long, default_value_t = 8)]
    pub terms: usize,
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,
    /// Receives corpus.tsv, tokens.jsonl and planted.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Vector store [config: paths.store].
    #[arg(long, visible_alias = "vectors")]
    pub store: Option<PathBuf>,
    /// Projection CSV [config: paths.projection].
    #[arg(long)]
    pub projection: Option<PathBuf>,
    /// Concept index [config: paths.corpus].
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Session file, created on first save [config: paths.session].
    #[arg(long)]
    pub session: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let cfg = PipelineConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Ingest(a) => ingest(&cfg, a),
        Command::Pool(a) => pool(&cfg, a),
        Command::Project(a) => project(&cfg, a),
        Command::Sweep(a) => sweep_cmd(&cfg, a),
        Command::Cluster(a) => cluster(&cfg, a),
        Command::Name(a) => name(&cfg, a),
        Command::Report(a) => report(&cfg, a),
        Command::Synth(a) => synth(a),
        Command::Serve(a) => serve(&cfg, a),
    }
}

fn pick(flag: &Option<PathBuf>, config: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    flag.clone()
        .or_else(|| config.clone())
        .ok_or_else(|| WorkbenchError::Invalid(format!("missing --{name} (or the matching config path)")))
}

fn pick_report(flag: &Option<PathBuf>, cfg: &PipelineConfig, file: &str) -> Result<PathBuf> {
    pick(flag, &cfg.paths.reports.as_ref().map(|d| d.join(file)), "out")
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// `<path>.provenance.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".provenance.json");
    PathBuf::from(s)
}

#[derive(Debug, Serialize)]
struct InputRef {
    file: String,
    sha256: String,
}

/// Provenance record. File names only, so sidecars do not depend on where
/// the run happened.
#[derive(Debug, Serialize)]
struct Provenance {
    command: &'static str,
    tool_version: &'static str,
    config: Value,
    inputs: BTreeMap<String, InputRef>,
    outputs: Vec<String>,
}

impl Provenance {
    fn new(command: &'static str, config: Value) -> Self {
        Self { command, tool_version: env!("CARGO_PKG_VERSION"), config, inputs: BTreeMap::new(), outputs: Vec::new() }
    }

    fn input(mut self, role: &str, path: &Path) -> Result<Self> {
        let sha256 = file_digest(path)?;
        self.inputs.insert(role.into(), InputRef { file: file_name(path), sha256 });
        Ok(self)
    }

    fn output(mut self, path: &Path) -> Self {
        self.outputs.push(file_name(path));
        self
    }

    fn write(self, primary: &Path) -> Result<()> {
        save_json(&sidecar_path(primary), &self)
    }
}

fn ingest(cfg: &PipelineConfig, a: &IngestArgs) -> Result<()> {
    let out = pick(&a.out, &cfg.paths.corpus, "out")?;
    let index = pipeline::ingest(&read_to_string(&a.input)?)?;
    for r in &index.rejects {
        tracing::warn!(row_id = r.row_id, field = %r.field, "rejected corpus row: {}", r.reason);
    }
    for c in &index.conflicts {
        tracing::warn!(term = %c.term, kept = %c.kept_label, dropped = %c.dropped_label, "term seen under a second label");
    }
    save_json(&out, &index)?;
    Provenance::new("ingest", json!({})).input("corpus_tsv", &a.input)?.output(&out).write(&out)
}

fn pool(cfg: &PipelineConfig, a: &PoolArgs) -> Result<()> {
    let tokens = pick(&a.tokens, &cfg.paths.tokens, "tokens")?;
    let out = pick(&a.out, &cfg.paths.store, "out")?;
    let (meta, records) = load_tokens(&tokens)?;
    let pooled = pipeline::pool(&meta, &records)?;
    write_atomic(&out, formats::render_store(&pooled.meta, &pooled.normalized, Some(&pooled.raw)).as_bytes())?;
    Provenance::new("pool", json!({ "pooling": "sum", "normalize": "l2" }))
        .input("tokens", &tokens)?
        .output(&out)
        .write(&out)
}

fn select(store: &formats::VectorStore, raw: bool) -> Result<&[termscape_core::TermVector]> {
    store.select(raw).ok_or_else(|| WorkbenchError::Invalid("store has no raw vectors; re-run pool to add them".into()))
}

fn project(cfg: &PipelineConfig, a: &ProjectArgs) -> Result<()> {
    let input = pick(&a.vectors, &cfg.paths.store, "vectors")?;
    let out = pick(&a.out, &cfg.paths.projection, "out")?;
    let store = load_store(&input)?;
    let vectors = select(&store, a.raw)?;
    let params = cfg.umap(&a.layout.umap(a.n_neighbors, a.min_dist));
    let projection = pipeline::project(vectors, a.method, &params)?;
    write_atomic(
        &out,
        formats::render_projection_csv(&projection, vectors).map_err(|e| WorkbenchError::format(&out, e))?.as_bytes(),
    )?;
    Provenance::new("project", json!({ "method": a.method, "raw": a.raw, "projection": projection.source }))
        .input("vectors", &input)?
        .output(&out)
        .write(&out)
}

/// File name of one sweep run, e.g. `umap_nn15_md0.1.csv`.
pub fn sweep_file_name(n_neighbors: usize, min_dist: f64) -> String {
    format!("umap_nn{n_neighbors}_md{min_dist}.csv")
}

fn sweep_cmd(cfg: &PipelineConfig, a: &SweepArgs) -> Result<()> {
    let input = pick(&a.vectors, &cfg.paths.store, "vectors")?;
    let dir = pick(&a.out_dir, &cfg.paths.reports, "out-dir")?;
    std::fs::create_dir_all(&dir).map_err(|e| WorkbenchError::io(&dir, e))?;
    let store = load_store(&input)?;
    let vectors = select(&store, a.raw)?;
    let nn = if a.n_neighbors.is_empty() { DEFAULT_N_NEIGHBORS.to_vec() } else { a.n_neighbors.clone() };
    let md = if a.min_dist.is_empty() { DEFAULT_MIN_DIST.to_vec() } else { a.min_dist.clone() };
    let template = cfg.umap(&a.layout.umap(None, None));
    let ids: Vec<String> = vectors.iter().map(|v| v.term_id.clone()).collect();
    let runs = sweep(&pipeline::rows(vectors), &nn, &md, &template)?;

    let mut prov = Provenance::new("sweep", Value::Null).input("vectors", &input)?;
    let mut entries = Vec::with_capacity(runs.len());
    for run in runs {
        let source = ProjectionSource::Umap {
            params: run.params,
            init_used: run.embedding.init_used,
            a: run.embedding.a,
            b: run.embedding.b,
        };
        let projection = Projection2D { ids: ids.clone(), coords: run.embedding.coords, source };
        let path = dir.join(sweep_file_name(run.params.n_neighbors, run.params.min_dist));
        let csv = formats::render_projection_csv(&projection, vectors).map_err(|e| WorkbenchError::format(&path, e))?;
        write_atomic(&path, csv.as_bytes())?;
        entries.push(json!({ "file": file_name(&path), "projection": projection.source }));
        prov = prov.output(&path);
    }
    prov.config =
        json!({ "raw": a.raw, "n_neighbors": nn, "min_dist": md, "base_seed": template.seed, "runs": entries });
    prov.write(&dir.join("sweep"))
}

fn cluster(cfg: &PipelineConfig, a: &ClusterArgs) -> Result<()> {
    let input = pick(&a.vectors, &cfg.paths.store, "vectors")?;
    let out = pick_report(&a.out, cfg, "cluster.json")?;
    let store = load_store(&input)?;
    let mut prov = Provenance::new("cluster", Value::Null).input("vectors", &input)?;

    let index = match a.corpus.as_ref().or(cfg.paths.corpus.as_ref()) {
        Some(p) => {
            prov = prov.input("corpus", p)?;
            Some(load_index(p)?)
        }
        None => None,
    };
    let session = match a.session.as_ref().or(cfg.paths.session.as_ref()) {
        Some(p) => {
            let s = load_session(p)?;
            let corpus_digest = prov.inputs.get("corpus").map(|i| i.sha256.clone());
            let store_digest = prov.inputs["vectors"].sha256.clone();
            for w in files::session_ref_warnings(&s, corpus_digest.as_deref(), Some(&store_digest)) {
                tracing::warn!("{w}");
            }
            prov = prov.input("session", p)?;
            Some(s)
        }
        None => None,
    };

    let flags = KMeansConfig { k: a.k, restarts: a.restarts, max_iters: a.max_iters, tol: a.tol, seed: a.seed };
    let settings = cfg.kmeans(&flags);
    let output = pipeline::cluster(&store.vectors, index.as_ref(), session.as_ref(), a.group.as_deref(), &settings)?;
    save_json(&out, &output)?;
    prov.config = json!({ "kmeans": settings, "group": a.group });
    prov.output(&out).write(&out)
}

fn name(cfg: &PipelineConfig, a: &NameArgs) -> Result<()> {
    let input = pick(&a.vectors, &cfg.paths.store, "vectors")?;
    let out = pick_report(&a.out, cfg, "tree.json")?;
    let store = load_store(&input)?;
    let clustered: ClusterOutput = load_json(&a.cluster)?;
    let tree = pipeline::name(&store.vectors, &clustered)?;
    for w in &tree.warnings {
        tracing::warn!("{w}");
    }
    save_json(&out, &tree)?;
    let mut prov = Provenance::new("name", json!({ "election": "max_centroid_cosine" }))
        .input("vectors", &input)?
        .input("cluster", &a.cluster)?
        .output(&out);
    if let Some(dot) = &a.dot {
        write_atomic(dot, formats::render_dot(&tree).as_bytes())?;
        prov = prov.output(dot);
    }
    if let Some(table) = &a.table {
        write_atomic(table, formats::render_concept_table(&pipeline::concepts(&tree)).as_bytes())?;
        prov = prov.output(table);
    }
    prov.write(&out)
}

fn report(cfg: &PipelineConfig, a: &ReportArgs) -> Result<()> {
    let input = pick(&a.store, &cfg.paths.store, "store")?;
    let corpus = pick(&a.corpus, &cfg.paths.corpus, "corpus")?;
    let out = pick_report(&a.out, cfg, "separation.json")?;
    let store = load_store(&input)?;
    let index = load_index(&corpus)?;
    let separation = pipeline::separation(&index, &store.vectors)?;
    save_json(&out, &separation)?;
    let mut prov = Provenance::new("report", json!({ "histogram_bins": 40, "self_pairs": false }))
        .input("store", &input)?
        .input("corpus", &corpus)?
        .output(&out);
    if let (Some(cluster), Some(concepts_out)) = (&a.cluster, &a.concepts_out) {
        let clustered: ClusterOutput = load_json(cluster)?;
        let concepts = pipeline::concepts(&pipeline::name(&store.vectors, &clustered)?);
        save_json(concepts_out, &concepts)?;
        let table = concepts_out.with_extension("txt");
        write_atomic(&table, formats::render_concept_table(&concepts).as_bytes())?;
        prov = prov.input("cluster", cluster)?.output(concepts_out).output(&table);
    }
    prov.write(&out)
}

fn synth(a: &SynthArgs) -> Result<()> {
    let params = SynthParams {
        seed: a.seed,
        n_concepts: a.concepts,
        terms_per_concept: a.terms,
        dim: a.dim,
        noise_sigma: a.sigma,
    };
    let fixture = synth_fixture(&params)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| WorkbenchError::io(&a.out_dir, e))?;
    let corpus = a.out_dir.join("corpus.tsv");
    let tokens = a.out_dir.join("tokens.jsonl");
    let planted = a.out_dir.join("planted.json");
    let mut meta = Meta::new(a.dim, "synthetic");
    meta.extra.insert("generator".into(), serde_json::to_value(params).expect("params serialize"));
    write_atomic(&corpus, formats::render_corpus_tsv(&fixture.mentions).as_bytes())?;
    write_atomic(&tokens, formats::render_token_embeddings(&meta, &fixture.tokens).as_bytes())?;
    save_json(&planted, &fixture.planted)?;
    Provenance::new("synth", serde_json::to_value(params).expect("params serialize"))
        .output(&corpus)
        .output(&tokens)
        .output(&planted)
        .write(&a.out_dir.join("synth"))
}

fn serve(cfg: &PipelineConfig, a: &ServeArgs) -> Result<()> {
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|e| WorkbenchError::Invalid(format!("bad listen address: {e}")))?;
    let config = ServeConfig {
        store: pick(&a.store, &cfg.paths.store, "store")?,
        projection: pick(&a.projection, &cfg.paths.projection, "projection")?,
        corpus: pick(&a.corpus, &cfg.paths.corpus, "corpus")?,
        session: pick(&a.session, &cfg.paths.session, "session")?,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| WorkbenchError::io("<runtime>", e))?;
    runtime.block_on(service::serve(config, addr))
}
