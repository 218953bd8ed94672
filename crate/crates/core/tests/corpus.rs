use proptest::prelude::*;
use termscape_core::corpus::{build_concept_index, parse_corpus, ConceptIndex, CorpusError};

fn row() -> impl Strategy<Value = (String, String, String)> {
    ("[a-z ]{0,12}", "[ ]{0,2}[A-Za-z]{0,3}[ ]{0,2}", "[ ]{0,1}[A-C]{0,1}[ ]{0,1}")
}

fn tsv(rows: &[(String, String, String)]) -> String {
    let mut s = String::from(" general snomed LABEL \tExample\tTerm\n");
    for (e, t, l) in rows {
        s.push_str(&format!("{l}\t{e}\t{t}\n"));
    }
    s
}

#[test]
fn header_only_and_missing_column() {
    let p = parse_corpus("Example\tTerm\tGeneral SNOMED Label\n").unwrap();
    assert!(p.records.is_empty() && p.rejects.is_empty());
    assert_eq!(parse_corpus("Example\tGeneral SNOMED Label\n").unwrap_err(), CorpusError::MissingColumn("Term".into()));
}

proptest! {
    #[test]
    fn parse_never_yields_empty_fields(rows in prop::collection::vec(row(), 0..30)) {
        let p = parse_corpus(&tsv(&rows)).unwrap();
        prop_assert_eq!(p.records.len() + p.rejects.len(), rows.iter().filter(|r| !(r.0.trim().is_empty() && r.1.trim().is_empty() && r.2.trim().is_empty())).count());
        for r in &p.records {
            prop_assert!(!r.term.is_empty() && r.term == r.term.trim());
            prop_assert!(!r.concept_label.is_empty() && r.concept_label == r.concept_label.trim());
        }
    }

    #[test]
    fn index_round_trips_and_counts(rows in prop::collection::vec(row(), 0..30)) {
        let p = parse_corpus(&tsv(&rows)).unwrap();
        let index = build_concept_index(&p.records);
        let unique: std::collections::BTreeSet<&str> = p.records.iter().map(|r| r.term.as_str()).collect();
        prop_assert_eq!(index.n_terms(), unique.len());
        for t in &unique {
            let homes = index.concepts.values().filter(|ts| ts.iter().any(|x| x == t)).count();
            prop_assert_eq!(homes, 1);
        }
        let json = serde_json::to_string(&index).unwrap();
        let back: ConceptIndex = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, index);
    }
}
