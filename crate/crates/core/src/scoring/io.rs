//! Transcript TSV input and scoring outputs (alignment CSV, summary JSON,
//! IWER CSV).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{align, iwer_table, AlignmentResult, ErrorCounts, Token, WordStats};
use crate::util::write_atomic;

#[derive(Debug, thiserror::Error)]
pub enum TranscriptError {
    #[error("{path}:{line}: empty utterance id")]
    MalformedLine { path: String, line: usize },
    #[error("{path}:{line}: duplicate utterance id `{utt_id}`")]
    DuplicateUtterance {
        path: String,
        line: usize,
        utt_id: String,
    },
    #[error("no hypothesis for utterance `{0}`")]
    MissingHypothesis(String),
    #[error("hypothesis for unknown utterance `{0}`")]
    UnexpectedHypothesis(String),
    #[error("{path}:{line}: {message}")]
    BadRecord {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

/// Utterance id → raw transcript, in id order.
pub type Transcripts = BTreeMap<String, String>;

/// Parses `utt_id<TAB>transcript` lines. Blank lines are skipped; a line
/// with no tab is an utterance with an empty transcript.
pub fn parse_transcripts(text: &str, source: &str) -> Result<Transcripts, TranscriptError> {
    let mut out = Transcripts::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (id, transcript) = line.split_once('\t').unwrap_or((line, ""));
        let id = id.trim();
        if id.is_empty() {
            return Err(TranscriptError::MalformedLine {
                path: source.to_string(),
                line: line_no,
            });
        }
        if out.insert(id.to_string(), transcript.to_string()).is_some() {
            return Err(TranscriptError::DuplicateUtterance {
                path: source.to_string(),
                line: line_no,
                utt_id: id.to_string(),
            });
        }
    }
    Ok(out)
}

pub fn read_transcripts(path: &Path) -> Result<Transcripts, TranscriptError> {
    let text = std::fs::read_to_string(path).map_err(|source| TranscriptError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_transcripts(&text, &path.display().to_string())
}

/// Serializes transcripts back to the TSV form, sorted by utterance id.
pub fn format_transcripts(transcripts: &Transcripts) -> String {
    let mut out = String::new();
    for (id, t) in transcripts {
        out.push_str(id);
        out.push('\t');
        out.push_str(t);
        out.push('\n');
    }
    out
}

/// One scored utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredUtterance {
    pub utt_id: String,
    pub alignment: AlignmentResult,
}

/// Aligns every reference utterance against its hypothesis.
pub fn score_pairs(
    refs: &Transcripts,
    hyps: &Transcripts,
) -> Result<Vec<ScoredUtterance>, TranscriptError> {
    if let Some(extra) = hyps.keys().find(|k| !refs.contains_key(*k)) {
        return Err(TranscriptError::UnexpectedHypothesis(extra.clone()));
    }
    refs.iter()
        .map(|(id, r)| {
            let h = hyps
                .get(id)
                .ok_or_else(|| TranscriptError::MissingHypothesis(id.clone()))?;
            Ok(ScoredUtterance {
                utt_id: id.clone(),
                alignment: align(&super::normalize(r), &super::normalize(h)),
            })
        })
        .collect()
}

/// Corpus summary written next to the per-utterance CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub utterances: usize,
    #[serde(flatten)]
    pub counts: ErrorCounts,
    /// Full-precision WER in percent.
    pub wer: f64,
    /// WER rounded to two decimals.
    pub wer_display: String,
}

impl CorpusSummary {
    pub fn from_scored(scored: &[ScoredUtterance]) -> Result<Self, super::ScoringError> {
        let counts = ErrorCounts::sum(scored.iter().map(|s| &s.alignment));
        let wer = counts.wer()?;
        Ok(Self {
            utterances: scored.len(),
            counts,
            wer,
            wer_display: crate::util::format_fixed(wer, 2),
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct AlignmentRow {
    utt_id: String,
    #[serde(rename = "S")]
    subs: usize,
    #[serde(rename = "D")]
    dels: usize,
    #[serde(rename = "I")]
    ins: usize,
    #[serde(rename = "N")]
    ref_words: usize,
}

pub fn alignment_csv(scored: &[ScoredUtterance]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in scored {
        w.serialize(AlignmentRow {
            utt_id: s.utt_id.clone(),
            subs: s.alignment.subs(),
            dels: s.alignment.dels(),
            ins: s.alignment.ins(),
            ref_words: s.alignment.ref_len(),
        })
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
}

/// Reads per-utterance counts written by [`alignment_csv`].
pub fn parse_alignment_counts(
    text: &str,
    source: &str,
) -> Result<Vec<(String, ErrorCounts)>, TranscriptError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.deserialize::<AlignmentRow>()
        .map(|row| {
            let row = row.map_err(|source_err| TranscriptError::Csv {
                path: source.to_string(),
                source: source_err,
            })?;
            Ok((
                row.utt_id,
                ErrorCounts {
                    subs: row.subs,
                    dels: row.dels,
                    ins: row.ins,
                    ref_words: row.ref_words,
                },
            ))
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct IwerRow {
    word: String,
    count: usize,
    subs: usize,
    dels: usize,
    iwer: f64,
}

pub fn iwer_csv(table: &[WordStats]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in table {
        w.serialize(IwerRow {
            word: s.word.to_string(),
            count: s.count,
            subs: s.subs,
            dels: s.dels,
            iwer: s.iwer,
        })
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
}

/// Parses an IWER CSV (`word,count,subs,dels,iwer`). Word keys are
/// re-normalized; `iwer` is recomputed from the counts and must agree.
pub fn parse_iwer_csv(text: &str, source: &str) -> Result<Vec<WordStats>, TranscriptError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (idx, row) in rdr.deserialize::<IwerRow>().enumerate() {
        let line = idx + 2;
        let bad = |message: String| TranscriptError::BadRecord {
            path: source.to_string(),
            line,
            message,
        };
        let row = row.map_err(|e| bad(e.to_string()))?;
        let word = Token::normalized(&row.word)
            .ok_or_else(|| bad(format!("invalid word {:?}", row.word)))?;
        if row.count == 0 || row.subs + row.dels > row.count {
            return Err(bad("inconsistent counts".into()));
        }
        let iwer = (row.subs + row.dels) as f64 / row.count as f64;
        if (iwer - row.iwer).abs() > 1e-6 {
            return Err(bad(format!("iwer {} does not match counts", row.iwer)));
        }
        if !seen.insert(word.clone()) {
            return Err(bad(format!("duplicate word {word}")));
        }
        out.push(WordStats {
            word,
            count: row.count,
            subs: row.subs,
            dels: row.dels,
            iwer,
        });
    }
    Ok(out)
}

/// Files produced by [`write_scoring_outputs`].
pub const ALIGNMENT_FILE: &str = "alignments.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const IWER_FILE: &str = "iwer.csv";

/// Scores `refs` against `hyps` and writes the three scoring outputs into
/// `out_dir`.
pub fn write_scoring_outputs(
    scored: &[ScoredUtterance],
    min_count: usize,
    out_dir: &Path,
) -> Result<CorpusSummary, Box<dyn std::error::Error + Send + Sync>> {
    let summary = CorpusSummary::from_scored(scored)?;
    let table = iwer_table(scored.iter().map(|s| &s.alignment), min_count);
    write_atomic(
        &out_dir.join(ALIGNMENT_FILE),
        alignment_csv(scored).as_bytes(),
    )?;
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    write_atomic(&out_dir.join(SUMMARY_FILE), json.as_bytes())?;
    write_atomic(&out_dir.join(IWER_FILE), iwer_csv(&table).as_bytes())?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_tsv() {
        let t = parse_transcripts("u2\tHello there\n\nu1\tthe cat\r\nu3\n", "x").unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t["u1"], "the cat");
        assert_eq!(t["u3"], "");
        assert_eq!(t.keys().next().unwrap(), "u1");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = parse_transcripts("u1\ta\nu1\tb\n", "refs.tsv").unwrap_err();
        assert!(matches!(
            err,
            TranscriptError::DuplicateUtterance { line: 2, .. }
        ));
        assert!(err.to_string().starts_with("refs.tsv:2"));
    }

    #[test]
    fn pairing_errors() {
        let r = parse_transcripts("u1\ta\nu2\tb\n", "r").unwrap();
        let h = parse_transcripts("u1\ta\n", "h").unwrap();
        assert!(matches!(
            score_pairs(&r, &h),
            Err(TranscriptError::MissingHypothesis(id)) if id == "u2"
        ));
        let h = parse_transcripts("u1\ta\nu2\tb\nu9\tc\n", "h").unwrap();
        assert!(matches!(
            score_pairs(&r, &h),
            Err(TranscriptError::UnexpectedHypothesis(id)) if id == "u9"
        ));
    }

    #[test]
    fn alignment_csv_round_trip() {
        let r = parse_transcripts("u1\tthe cat sat\nu2\ta b c d\n", "r").unwrap();
        let h = parse_transcripts("u1\tthe bat sat on\nu2\ta c d\n", "h").unwrap();
        let scored = score_pairs(&r, &h).unwrap();
        let csv_text = alignment_csv(&scored);
        assert!(csv_text.starts_with("utt_id,S,D,I,N\n"));
        let back = parse_alignment_counts(&csv_text, "mem").unwrap();
        assert_eq!(
            back[0].1,
            ErrorCounts {
                subs: 1,
                dels: 0,
                ins: 1,
                ref_words: 3
            }
        );
        assert_eq!(
            back[1].1,
            ErrorCounts {
                subs: 0,
                dels: 1,
                ins: 0,
                ref_words: 4
            }
        );
    }

    #[test]
    fn iwer_csv_round_trip() {
        let table = vec![WordStats {
            word: Token::new("THE").unwrap(),
            count: 10,
            subs: 2,
            dels: 1,
            iwer: 0.3,
        }];
        let text = iwer_csv(&table);
        assert_eq!(parse_iwer_csv(&text, "mem").unwrap(), table);
        let bad = "word,count,subs,dels,iwer\nTHE,10,2,1,0.5\n";
        assert!(parse_iwer_csv(bad, "mem").is_err());
    }

    #[test]
    fn outputs_written() {
        let dir = tempfile::tempdir().unwrap();
        let r = parse_transcripts("u1\tthe cat sat\n", "r").unwrap();
        let h = parse_transcripts("u1\tthe bat sat on\n", "h").unwrap();
        let scored = score_pairs(&r, &h).unwrap();
        let summary = write_scoring_outputs(&scored, 1, dir.path()).unwrap();
        assert_eq!(summary.wer_display, "66.67");
        for f in [ALIGNMENT_FILE, SUMMARY_FILE, IWER_FILE] {
            assert!(dir.path().join(f).exists());
        }
    }
}
