use std::path::PathBuf;

use avsr_gauge_core::scoring::io::{
    parse_alignment_counts, read_transcripts, score_pairs, write_scoring_outputs, CorpusSummary,
};
use avsr_gauge_core::scoring::{iwer_table, ErrorCounts};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures/wer")
        .join(name)
}

fn scored() -> Vec<avsr_gauge_core::scoring::io::ScoredUtterance> {
    let refs = read_transcripts(&fixture("refs.txt")).unwrap();
    let hyps = read_transcripts(&fixture("hyps.txt")).unwrap();
    score_pairs(&refs, &hyps).unwrap()
}

#[test]
fn per_utterance_counts_match_hand_counts() {
    let expected = parse_alignment_counts(
        &std::fs::read_to_string(fixture("expected.csv")).unwrap(),
        "expected.csv",
    )
    .unwrap();
    let got: Vec<(String, ErrorCounts)> = scored()
        .iter()
        .map(|s| (s.utt_id.clone(), ErrorCounts::sum([&s.alignment])))
        .collect();
    assert_eq!(got, expected);
}

#[test]
fn corpus_totals() {
    let s = CorpusSummary::from_scored(&scored()).unwrap();
    assert_eq!(
        (
            s.counts.subs,
            s.counts.dels,
            s.counts.ins,
            s.counts.ref_words
        ),
        (4, 7, 3, 38)
    );
    assert!((s.wer - 1400.0 / 38.0).abs() < 1e-12);
    assert_eq!(s.wer_display, "36.84");
}

#[test]
fn per_word_rates() {
    let scored = scored();
    let table = iwer_table(scored.iter().map(|s| &s.alignment), 1);
    let get = |w: &str| table.iter().find(|t| t.word.as_str() == w).unwrap();
    assert_eq!((get("THE").count, get("THE").dels), (2, 1));
    assert_eq!((get("IS").count, get("IS").subs), (2, 1));
    assert_eq!(get("IT").iwer, 0.0);
    assert_eq!(get("SEA").iwer, 1.0);
    assert_eq!(get("DON'T").iwer, 0.0);
    // inserted words never appear
    assert!(table
        .iter()
        .all(|t| !["THERE", "FOUR", "FIVE", "X", "WAS"].contains(&t.word.as_str())));
    let filtered = iwer_table(scored.iter().map(|s| &s.alignment), 2);
    let words: Vec<&str> = filtered.iter().map(|t| t.word.as_str()).collect();
    assert_eq!(words, ["BE", "IS", "IT", "THE", "TO"]);
}

#[test]
fn written_outputs_replay() {
    let dir = tempfile::tempdir().unwrap();
    write_scoring_outputs(&scored(), 1, dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("alignments.csv")).unwrap();
    let expected = std::fs::read_to_string(fixture("expected.csv")).unwrap();
    assert_eq!(
        parse_alignment_counts(&csv, "out").unwrap(),
        parse_alignment_counts(&expected, "expected").unwrap()
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["wer_display"], "36.84");
    assert!(dir.path().join("iwer.csv").is_file());
}
