mod common;

use std::collections::BTreeSet;
use std::fs;

use common::{cli, run_pipeline, s};
use serde_json::Value;
use termscape::atomic::file_digest;
use termscape::cli::{sidecar_path, sweep_file_name};
use termscape::formats::{parse_projection_csv, parse_store};
use termscape::pipeline::ClusterOutput;
use termscape_core::evaluate::SeparationReport;
use termscape_core::{AnnotationSession, ConceptIndex, ParentTree};

fn json(path: &std::path::Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(cli(&["--help"]), 0);
    assert_eq!(cli(&["--version"]), 0);
    assert_eq!(cli(&["project", "--help"]), 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(cli(&[]), 1);
    assert_eq!(cli(&["frobnicate"]), 1);
    assert_eq!(cli(&["project", "--no-such-flag"]), 1);
    assert_eq!(cli(&["project", "--metric", "manhattan"]), 1);
    assert_eq!(cli(&["report", "--cluster", "c.json"]), 1);
}

#[test]
fn missing_required_path_is_a_contract_error() {
    assert_eq!(cli(&["project"]), 1);
}

#[test]
fn missing_input_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    assert_eq!(cli(&["ingest", "--input", s(&dir.path().join("absent.tsv")), "--out", s(&out)]), 2);
    assert!(!out.exists());
}

#[test]
fn malformed_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let tokens = dir.path().join("tokens.jsonl");
    fs::write(
        &tokens,
        "{\"type\":\"meta\",\"dim\":2}\n{\"term_id\":\"t0\",\"term\":\"a\",\"tokens\":[\"a\"],\"vectors\":[[1,2,3]]}\n",
    )
    .unwrap();
    assert_eq!(cli(&["pool", "--tokens", s(&tokens), "--out", s(&dir.path().join("store.jsonl"))]), 1);
}

#[test]
fn k_larger_than_the_store_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = run_pipeline(dir.path());
    let out = dir.path().join("big.json");
    assert_eq!(cli(&["cluster", "--vectors", s(&p.store), "--k", "41", "--out", s(&out)]), 1);
    assert!(!out.exists());
}

#[test]
fn pipeline_outputs_have_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let p = run_pipeline(dir.path());

    let index: ConceptIndex = serde_json::from_str(&fs::read_to_string(&p.corpus).unwrap()).unwrap();
    assert_eq!((index.n_concepts(), index.n_terms()), (5, 40));

    let store = parse_store(&fs::read_to_string(&p.store).unwrap()).unwrap();
    assert_eq!(store.vectors.len(), 40);
    assert_eq!(store.raw.as_ref().map(Vec::len), Some(40));
    assert!(store.vectors.iter().all(|v| v.normalized));

    let rows = parse_projection_csv(&fs::read_to_string(&p.projection).unwrap()).unwrap();
    assert_eq!(rows.len(), 40);
    let ids: Vec<&str> = rows.iter().map(|r| r.term_id.as_str()).collect();
    let store_ids: Vec<&str> = store.vectors.iter().map(|v| v.term_id.as_str()).collect();
    assert_eq!(ids, store_ids);

    let report: SeparationReport = serde_json::from_str(&fs::read_to_string(&p.separation).unwrap()).unwrap();
    assert_eq!(report.n_within + report.n_cross, 40 * 39 / 2);

    let clustered: ClusterOutput = serde_json::from_str(&fs::read_to_string(&p.cluster).unwrap()).unwrap();
    assert_eq!(clustered.groups.len(), 1);
    assert_eq!(clustered.groups[0].model.k(), 5);
    let tree: ParentTree = serde_json::from_str(&fs::read_to_string(&p.tree).unwrap()).unwrap();
    assert_eq!(tree.clusters.len(), 5);
}

#[test]
fn provenance_records_config_and_input_digests() {
    let dir = tempfile::tempdir().unwrap();
    let p = run_pipeline(dir.path());
    let prov = json(&sidecar_path(&p.projection));
    assert_eq!(prov["command"], "project");
    assert_eq!(prov["inputs"]["vectors"]["file"], "store.jsonl");
    assert_eq!(prov["inputs"]["vectors"]["sha256"], file_digest(&p.store).unwrap());
    let params = &prov["config"]["projection"]["params"];
    assert_eq!((params["n_neighbors"].as_u64(), params["seed"].as_u64()), (Some(10), Some(42)));
    assert_eq!(params["min_dist"].as_f64(), Some(0.1));

    let prov = json(&sidecar_path(&p.cluster));
    assert_eq!(prov["config"]["kmeans"]["k"], 5);
    assert_eq!(prov["inputs"]["corpus"]["sha256"], file_digest(&p.corpus).unwrap());
    for out in [&p.corpus, &p.store, &p.tree, &p.separation] {
        assert!(sidecar_path(out).exists(), "no sidecar for {}", out.display());
    }
    assert!(dir.path().join("synth.provenance.json").exists());
}

#[test]
fn rerun_is_byte_identical_including_sidecars() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_pipeline(a.path());
    run_pipeline(b.path());
    let names: BTreeSet<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert!(names.len() >= 18);
    for name in names {
        let (x, y) = (fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap());
        assert!(x == y, "{name:?} differs");
    }
}

#[test]
fn sweep_writes_one_projection_per_pair() {
    let dir = tempfile::tempdir().unwrap();
    let p = run_pipeline(dir.path());
    let out = dir.path().join("sweep");
    let code = cli(&[
        "sweep",
        "--vectors",
        s(&p.store),
        "--n-neighbors",
        "5,15,30",
        "--min-dist",
        "0.01,0.1,0.5",
        "--n-epochs",
        "50",
        "--out-dir",
        s(&out),
    ]);
    assert_eq!(code, 0);
    let csvs: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    assert_eq!(csvs.len(), 9);
    for nn in [5, 15, 30] {
        for md in [0.01, 0.1, 0.5] {
            let text = fs::read_to_string(out.join(sweep_file_name(nn, md))).unwrap();
            assert_eq!(parse_projection_csv(&text).unwrap().len(), 40);
        }
    }
    let prov = json(&out.join("sweep.provenance.json"));
    let runs = prov["config"]["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 9);
    let seeds: BTreeSet<u64> = runs.iter().map(|r| r["projection"]["params"]["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds.len(), 9);
}

#[test]
fn pca_and_raw_projections() {
    let dir = tempfile::tempdir().unwrap();
    let p = run_pipeline(dir.path());
    let pca = dir.path().join("pca.csv");
    assert_eq!(cli(&["project", "--vectors", s(&p.store), "--method", "pca", "--out", s(&pca)]), 0);
    assert_eq!(parse_projection_csv(&fs::read_to_string(&pca).unwrap()).unwrap().len(), 40);
    assert_eq!(json(&sidecar_path(&pca))["config"]["projection"]["produced_by"], "pca");

    let raw = dir.path().join("raw.csv");
    let code = cli(&[
        "project",
        "--vectors",
        s(&p.store),
        "--raw",
        "--n-neighbors",
        "10",
        "--n-epochs",
        "50",
        "--out",
        s(&raw),
    ]);
    assert_eq!(code, 0);
    assert_eq!(json(&sidecar_path(&raw))["config"]["raw"], true);
}

#[test]
fn config_file_supplies_paths_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let p = run_pipeline(dir.path());
    let out = dir.path().join("from_config.csv");
    let cfg = dir.path().join("run.json");
    let body = serde_json::json!({
        "seed": 3,
        "paths": { "store": p.store, "projection": out },
        "umap": { "n_neighbors": 6, "n_epochs": 40 }
    });
    fs::write(&cfg, body.to_string()).unwrap();
    assert_eq!(cli(&["--config", s(&cfg), "project", "--n-neighbors", "8"]), 0);
    let params = json(&sidecar_path(&out))["config"]["projection"]["params"].clone();
    assert_eq!(params["n_neighbors"], 8);
    assert_eq!(params["n_epochs"], 40);
    assert_eq!(params["seed"], 3);

    fs::write(&cfg, r#"{"umap": {"neighbours": 3}}"#).unwrap();
    assert_eq!(cli(&["--config", s(&cfg), "project"]), 1);
}

#[test]
fn annotated_session_groups_are_clustered_and_named() {
    let dir = tempfile::tempdir().unwrap();
    let p = run_pipeline(dir.path());
    let store = parse_store(&fs::read_to_string(&p.store).unwrap()).unwrap();
    let catalog: BTreeSet<String> = store.vectors.iter().map(|v| v.term_id.clone()).collect();
    let first: Vec<String> = store.vectors[..8].iter().map(|v| v.term_id.clone()).collect();
    let mut session = AnnotationSession::new("s", "stale", file_digest(&p.store).unwrap());
    session.assign_terms(&catalog, "g1", &first, "tester", 1).unwrap();
    session.set_label("g1", "Headache", "tester", 2).unwrap();
    let session_path = dir.path().join("session.json");
    fs::write(&session_path, serde_json::to_string(&session).unwrap()).unwrap();

    let out = dir.path().join("groups.json");
    let tree = dir.path().join("groups_tree.json");
    let table = dir.path().join("groups.txt");
    let dot = dir.path().join("groups.dot");
    assert_eq!(
        cli(&[
            "cluster",
            "--vectors",
            s(&p.store),
            "--corpus",
            s(&p.corpus),
            "--session",
            s(&session_path),
            "--out",
            s(&out)
        ]),
        0
    );
    assert_eq!(
        cli(&[
            "name",
            "--vectors",
            s(&p.store),
            "--cluster",
            s(&out),
            "--out",
            s(&tree),
            "--table",
            s(&table),
            "--dot",
            s(&dot)
        ]),
        0
    );
    let tree: ParentTree = serde_json::from_str(&fs::read_to_string(&tree).unwrap()).unwrap();
    assert_eq!(tree.clusters.len(), 1);
    assert_eq!(tree.clusters[0].label, "Headache");
    assert_eq!(tree.clusters[0].parent, "c00 synonym 00");
    assert!(fs::read_to_string(&table).unwrap().contains("Headache  c00 synonym 00"));
    assert!(fs::read_to_string(&dot).unwrap().starts_with("digraph"));

    let missing = dir.path().join("missing.json");
    assert_eq!(
        cli(&[
            "cluster",
            "--vectors",
            s(&p.store),
            "--session",
            s(&session_path),
            "--group",
            "nope",
            "--out",
            s(&missing)
        ]),
        1
    );
}

#[test]
fn tampered_session_log_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = run_pipeline(dir.path());
    let mut session = AnnotationSession::new("s", "", "");
    let catalog: BTreeSet<String> = ["t0".to_string()].into();
    session.assign_terms(&catalog, "g1", &["t0".to_string()], "tester", 1).unwrap();
    session.version = 5;
    let path = dir.path().join("bad_session.json");
    fs::write(&path, serde_json::to_string(&session).unwrap()).unwrap();
    let out = dir.path().join("x.json");
    assert_eq!(cli(&["cluster", "--vectors", s(&p.store), "--session", s(&path), "--out", s(&out)]), 1);
}

#[test]
fn ingest_reports_rejected_rows_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let tsv = dir.path().join("corpus.tsv");
    fs::write(
        &tsv,
        "Example\tTerm\tGeneral SNOMED Label\nmy head hurts\thead pain\tHeadache\nno term here\t\tHeadache\nheart racing again\theart racing\tTachycardia\n",
    )
    .unwrap();
    let out = dir.path().join("corpus.json");
    assert_eq!(cli(&["ingest", "--input", s(&tsv), "--out", s(&out)]), 0);
    let index: ConceptIndex = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(index.n_terms(), 2);
    assert_eq!(index.rejects.len(), 1);
    assert_eq!(index.rejects[0].row_id, 1);

    fs::write(&tsv, "Sentence\tTerm\n").unwrap();
    assert_eq!(cli(&["ingest", "--input", s(&tsv), "--out", s(&out)]), 1);
}

#[test]
fn synth_rejects_impossible_dimension() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cli(&["synth", "--concepts", "6", "--dim", "5", "--out-dir", s(dir.path())]), 1);
}
