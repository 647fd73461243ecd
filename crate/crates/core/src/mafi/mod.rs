//! Word-level visual informativeness (MaFI) scores and their correlation
//! with per-word error rates.

mod norms;
mod phonology;
pub mod stats;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scoring::{Token, WordStats};

pub use norms::{load_norms, parse_norms, MafiEntry, SCORE_MAX, SCORE_MIN};
pub use phonology::{
    alignment_cost, g2p, mafi_score, FeatureTable, FeatureVector, Lexicon, PhonSegment,
    DEFAULT_FEATURE_TABLE, FEATURE_NAMES, N_FEATURES, SAMPLE_LEXICON,
};
pub use stats::{format_correlation, p_value, pearson, permutation_p, stars, PValue, StatsError};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MafiError {
    #[error("`{0}` is not in the lexicon")]
    OutOfVocabulary(String),
    #[error("target pronunciation is empty")]
    EmptyTarget,
    #[error("at least one guess is required")]
    NoGuesses,
    #[error("line {line}: unknown phone `{phone}`")]
    UnknownPhone { line: usize, phone: String },
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("line {line}: duplicate word `{word}`")]
    DuplicateWord { line: usize, word: String },
    #[error("line {line}: score {score} outside [{SCORE_MIN}, {SCORE_MAX}]")]
    ScoreOutOfRange { line: usize, score: f64 },
    #[error("no word has both a MaFI score and an IWER entry")]
    EmptyIntersection,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Pearson test of MaFI score against IWER.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub n: usize,
    pub p: f64,
    pub stars: String,
    /// |r| = 1; `p` is reported as 0.
    pub degenerate: bool,
}

impl CorrelationResult {
    pub fn from_r(r: f64, n: usize) -> Result<Self, StatsError> {
        let pv = p_value(r, n)?;
        Ok(Self {
            r,
            n,
            p: pv.p,
            stars: stars(pv.p).to_string(),
            degenerate: pv.degenerate,
        })
    }

    /// Table cell such as `-0.097**`.
    pub fn cell(&self) -> String {
        format_correlation(self.r, self.p)
    }
}

/// Paired (score, iwer) samples for words in both sets, in word order.
pub fn paired_samples(
    norms: &[MafiEntry],
    iwers: &[WordStats],
    min_count: usize,
) -> Vec<(Token, f64, f64)> {
    let scores: BTreeMap<&Token, f64> = norms.iter().map(|e| (&e.word, e.score)).collect();
    let mut pairs: Vec<(Token, f64, f64)> = iwers
        .iter()
        .filter(|w| w.count >= min_count.max(1))
        .filter_map(|w| scores.get(&w.word).map(|&s| (w.word.clone(), s, w.iwer)))
        .collect();
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    pairs
}

/// Correlates MaFI scores (x) with IWER (y) over words seen at least
/// `min_count` times.
pub fn correlate(
    norms: &[MafiEntry],
    iwers: &[WordStats],
    min_count: usize,
) -> Result<CorrelationResult, MafiError> {
    let pairs = paired_samples(norms, iwers, min_count);
    if pairs.is_empty() {
        return Err(MafiError::EmptyIntersection);
    }
    let x: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    let r = pearson(&x, &y)?;
    Ok(CorrelationResult::from_r(r, x.len())?)
}
