mod common;

use common::*;
use proptest::prelude::*;
use termscape_core::corpus::{build_concept_index, MentionRecord};
use termscape_core::evaluate::{purity, separation_from_values, separation_report};

/// Direct recount: for every cluster id, the most common gold label.
fn purity_oracle(assign: &[usize], gold: &[usize]) -> f64 {
    let k = assign.iter().max().unwrap() + 1;
    let g = gold.iter().max().unwrap() + 1;
    let mut total = 0;
    for c in 0..k {
        let best = (0..g).map(|l| assign.iter().zip(gold).filter(|(a, b)| **a == c && **b == l).count()).max().unwrap();
        total += best;
    }
    total as f64 / assign.len() as f64
}

#[test]
fn random_20_point_instance() {
    let mut r = rng(20);
    let assign: Vec<usize> = (0..20).map(|_| rand::Rng::random_range(&mut r, 0..4)).collect();
    let gold: Vec<usize> = (0..20).map(|_| rand::Rng::random_range(&mut r, 0..3)).collect();
    assert_eq!(purity(&assign, &gold).unwrap(), purity_oracle(&assign, &gold));
}

#[test]
fn constant_lists_gap() {
    let r = separation_from_values(&[0.9; 6], &[0.1; 9], 6).unwrap();
    assert!((r.mean_gap.unwrap() - 0.8).abs() < 1e-12);
}

#[test]
fn planted_fixture_gap() {
    use termscape_core::synth::{synth_fixture, SynthParams};
    use termscape_core::vecstore::build_store;
    let f = synth_fixture(&SynthParams { seed: 7, n_concepts: 5, terms_per_concept: 8, dim: 32, noise_sigma: 0.05 })
        .unwrap();
    let store = build_store(&f.tokens).unwrap();
    let index = build_concept_index(&f.mentions);
    let rep = separation_report(&index, &store.normalized).unwrap();
    assert_eq!(rep.n_within + rep.n_cross, 40 * 39 / 2);
    assert_eq!(rep.n_within, 5 * 28);
    // Brute-force means over the same pairs.
    let (mut w, mut c) = (Vec::new(), Vec::new());
    for i in 0..40 {
        for j in (i + 1)..40 {
            let s = brute_cosine(&store.raw[i].vector, &store.raw[j].vector);
            if i / 8 == j / 8 {
                w.push(s)
            } else {
                c.push(s)
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let gap = mean(&w) - mean(&c);
    assert!((rep.mean_gap.unwrap() - gap).abs() < 1e-12);
    assert!(gap >= 0.3, "gap {gap}");
}

proptest! {
    #[test]
    fn purity_matches_recount(pairs in prop::collection::vec((0usize..5, 0usize..4), 1..60)) {
        let (assign, gold): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let p = purity(&assign, &gold).unwrap();
        prop_assert_eq!(p, purity_oracle(&assign, &gold));
        let n_gold = gold.iter().collect::<std::collections::BTreeSet<_>>().len();
        prop_assert!(p >= 1.0 / n_gold as f64 - 1e-12 && p <= 1.0);
    }

    #[test]
    fn purity_ignores_cluster_ids(
        pairs in prop::collection::vec((0usize..5, 0usize..4), 1..60),
        perm in Just((0..5usize).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let (assign, gold): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let relabeled: Vec<usize> = assign.iter().map(|&c| perm[c]).collect();
        prop_assert_eq!(purity(&assign, &gold).unwrap(), purity(&relabeled, &gold).unwrap());
    }

    #[test]
    fn separation_totals(concepts in prop::collection::vec(0usize..4, 2..25), seed in any::<u64>()) {
        let mut r = rng(seed);
        let rows = gaussian_rows(&mut r, concepts.len(), 3);
        let store = term_vectors(&rows);
        let mentions: Vec<MentionRecord> = store
            .iter()
            .zip(&concepts)
            .enumerate()
            .map(|(i, (v, c))| MentionRecord { row_id: i, example: String::new(), term: v.term.clone(), concept_label: format!("C{c}") })
            .collect();
        let rep = separation_report(&build_concept_index(&mentions), &store).unwrap();
        let n = concepts.len() as u64;
        prop_assert_eq!(rep.n_within + rep.n_cross, n * (n - 1) / 2);
        prop_assert_eq!(rep.within.as_ref().map_or(0, |h| h.n), rep.n_within);
        prop_assert_eq!(rep.cross.as_ref().map_or(0, |h| h.n), rep.n_cross);
    }
}
