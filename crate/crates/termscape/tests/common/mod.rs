#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;
use termscape_core::seed::rng_from_seed;

pub use rand_chacha::ChaCha8Rng;

pub fn cli(args: &[&str]) -> i32 {
    termscape::cli::run(std::iter::once("termscape").chain(args.iter().copied()))
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    rng_from_seed(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Artifacts of the synthetic pipeline run through the CLI.
pub struct Pipeline {
    pub dir: PathBuf,
    pub corpus: PathBuf,
    pub store: PathBuf,
    pub projection: PathBuf,
    pub cluster: PathBuf,
    pub tree: PathBuf,
    pub separation: PathBuf,
    pub concepts: PathBuf,
    pub planted: PathBuf,
}

/// synth → ingest → pool → project (UMAP) → cluster → name → report, with
/// the settings of the end-to-end acceptance check.
pub fn run_pipeline(dir: &Path) -> Pipeline {
    let p = |f: &str| dir.join(f);
    let out = Pipeline {
        dir: dir.to_path_buf(),
        corpus: p("corpus.json"),
        store: p("store.jsonl"),
        projection: p("projection.csv"),
        cluster: p("cluster.json"),
        tree: p("tree.json"),
        separation: p("separation.json"),
        concepts: p("concepts.json"),
        planted: p("planted.json"),
    };
    let (tsv, tokens) = (p("corpus.tsv"), p("tokens.jsonl"));
    let steps: Vec<Vec<&str>> = vec![
        vec![
            "synth",
            "--seed",
            "7",
            "--concepts",
            "5",
            "--terms",
            "8",
            "--dim",
            "32",
            "--sigma",
            "0.05",
            "--out-dir",
            s(dir),
        ],
        vec!["ingest", "--input", s(&tsv), "--out", s(&out.corpus)],
        vec!["pool", "--tokens", s(&tokens), "--out", s(&out.store)],
        vec![
            "project",
            "--vectors",
            s(&out.store),
            "--n-neighbors",
            "10",
            "--min-dist",
            "0.1",
            "--seed",
            "42",
            "--out",
            s(&out.projection),
        ],
        vec![
            "cluster",
            "--vectors",
            s(&out.store),
            "--corpus",
            s(&out.corpus),
            "--k",
            "5",
            "--restarts",
            "10",
            "--seed",
            "42",
            "--out",
            s(&out.cluster),
        ],
        vec!["name", "--vectors", s(&out.store), "--cluster", s(&out.cluster), "--out", s(&out.tree)],
        vec![
            "report",
            "--store",
            s(&out.store),
            "--corpus",
            s(&out.corpus),
            "--out",
            s(&out.separation),
            "--cluster",
            s(&out.cluster),
            "--concepts-out",
            s(&out.concepts),
        ],
    ];
    for step in steps {
        assert_eq!(cli(&step), 0, "step failed: {step:?}");
    }
    out
}
