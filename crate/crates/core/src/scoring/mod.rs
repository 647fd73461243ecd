//! Transcript scoring: normalization, Levenshtein alignment, corpus WER,
//! per-word error rates and relative WER increases.

mod align;
pub mod io;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use align::{align, AlignmentResult, EditOp};

/// Default IWER occurrence threshold: words seen more than six times.
pub const DEFAULT_MIN_COUNT: usize = 7;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ScoringError {
    #[error("reference set contains no words")]
    EmptyReference,
    #[error("baseline WER must be positive, got {0}")]
    ZeroBaseline(f64),
    #[error("invalid token {0:?}")]
    InvalidToken(String),
}

/// A normalized word: uppercase, no whitespace, non-empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    /// Builds a token from already-normalized text.
    pub fn new(text: impl Into<String>) -> Result<Self, ScoringError> {
        let text = text.into();
        if text.is_empty() || text.chars().any(char::is_whitespace) {
            return Err(ScoringError::InvalidToken(text));
        }
        Ok(Token(text))
    }

    /// Normalizes a single word; `None` if nothing survives normalization
    /// or the input holds more than one word.
    pub fn normalized(word: &str) -> Option<Self> {
        let mut tokens = normalize(word);
        if tokens.len() == 1 {
            tokens.pop()
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Token {
    type Error = ScoringError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Token::new(value)
    }
}

impl From<Token> for String {
    fn from(t: Token) -> Self {
        t.0
    }
}

/// Uppercases, strips every character that is neither alphanumeric nor an
/// apostrophe, and splits on whitespace.
pub fn normalize(text: &str) -> Vec<Token> {
    text.split_whitespace()
        .filter_map(|word| {
            let cleaned: String = word
                .chars()
                .filter(|c| c.is_alphanumeric() || *c == '\'')
                .flat_map(char::to_uppercase)
                .collect();
            (!cleaned.is_empty()).then_some(Token(cleaned))
        })
        .collect()
}

/// Corpus-pooled WER in percent: `100 (S + D + I) / N`.
pub fn corpus_wer<'a, I>(alignments: I) -> Result<f64, ScoringError>
where
    I: IntoIterator<Item = &'a AlignmentResult>,
{
    let totals = ErrorCounts::sum(alignments);
    totals.wer()
}

/// Summed edit counts over a set of alignments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCounts {
    pub subs: usize,
    pub dels: usize,
    pub ins: usize,
    pub ref_words: usize,
}

impl ErrorCounts {
    pub fn sum<'a, I>(alignments: I) -> Self
    where
        I: IntoIterator<Item = &'a AlignmentResult>,
    {
        alignments
            .into_iter()
            .fold(ErrorCounts::default(), |acc, a| ErrorCounts {
                subs: acc.subs + a.subs(),
                dels: acc.dels + a.dels(),
                ins: acc.ins + a.ins(),
                ref_words: acc.ref_words + a.ref_len(),
            })
    }

    pub fn errors(&self) -> usize {
        self.subs + self.dels + self.ins
    }

    pub fn wer(&self) -> Result<f64, ScoringError> {
        if self.ref_words == 0 {
            return Err(ScoringError::EmptyReference);
        }
        Ok(100.0 * self.errors() as f64 / self.ref_words as f64)
    }
}

/// Per-word error statistics. Insertions are never attributed to a word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordStats {
    pub word: Token,
    pub count: usize,
    pub subs: usize,
    pub dels: usize,
    pub iwer: f64,
}

/// Builds the IWER table: for every reference word occurring at least
/// `min_count` times, `(subs + dels) / count`. Sorted by word.
///
/// `min_count` of 0 behaves like 1.
pub fn iwer_table<'a, I>(alignments: I, min_count: usize) -> Vec<WordStats>
where
    I: IntoIterator<Item = &'a AlignmentResult>,
{
    #[derive(Default)]
    struct Acc {
        count: usize,
        subs: usize,
        dels: usize,
    }
    let mut acc: BTreeMap<&Token, Acc> = BTreeMap::new();
    for a in alignments {
        for op in a.ops() {
            match *op {
                EditOp::Match { ref_idx, .. } => {
                    acc.entry(&a.reference()[ref_idx]).or_default().count += 1;
                }
                EditOp::Substitute { ref_idx, .. } => {
                    let e = acc.entry(&a.reference()[ref_idx]).or_default();
                    e.count += 1;
                    e.subs += 1;
                }
                EditOp::Delete { ref_idx } => {
                    let e = acc.entry(&a.reference()[ref_idx]).or_default();
                    e.count += 1;
                    e.dels += 1;
                }
                EditOp::Insert { .. } => {}
            }
        }
    }
    acc.into_iter()
        .filter(|(_, a)| a.count >= min_count.max(1))
        .map(|(word, a)| WordStats {
            word: word.clone(),
            count: a.count,
            subs: a.subs,
            dels: a.dels,
            iwer: (a.subs + a.dels) as f64 / a.count as f64,
        })
        .collect()
}

/// Relative WER change in percent: `100 (degraded - baseline) / baseline`.
pub fn relative_increase(baseline_wer: f64, degraded_wer: f64) -> Result<f64, ScoringError> {
    if !(baseline_wer > 0.0) {
        return Err(ScoringError::ZeroBaseline(baseline_wer));
    }
    Ok(100.0 * (degraded_wer - baseline_wer) / baseline_wer)
}
