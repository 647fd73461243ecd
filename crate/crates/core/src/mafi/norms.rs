use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MafiError;
use crate::scoring::Token;

/// Scores below this are treated as a corrupt file.
pub const SCORE_MIN: f64 = -4.0;
/// Scores above this are treated as a corrupt file; values in (0, SCORE_MAX]
/// are clamped to 0.
pub const SCORE_MAX: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MafiEntry {
    pub word: Token,
    /// At most 0; closer to 0 is more visually informative.
    pub score: f64,
}

/// Parses a `word,score` norms CSV. A first row whose score column is not a
/// number is taken as a header.
pub fn parse_norms(text: &str) -> Result<Vec<MafiEntry>, MafiError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 1;
        let bad = |message: String| MafiError::MalformedLine { line, message };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        if rec.len() != 2 {
            return Err(bad(format!(
                "expected `word,score`, got {} fields",
                rec.len()
            )));
        }
        let raw_score = rec[1].trim();
        let score: f64 = match raw_score.parse() {
            Ok(v) => v,
            Err(_) if idx == 0 => continue,
            Err(_) => return Err(bad(format!("bad score `{raw_score}`"))),
        };
        if !score.is_finite() || !(SCORE_MIN..=SCORE_MAX).contains(&score) {
            return Err(MafiError::ScoreOutOfRange { line, score });
        }
        let word =
            Token::normalized(&rec[0]).ok_or_else(|| bad(format!("bad word `{}`", &rec[0])))?;
        if !seen.insert(word.clone()) {
            return Err(MafiError::DuplicateWord {
                line,
                word: word.to_string(),
            });
        }
        out.push(MafiEntry {
            word,
            score: score.min(0.0),
        });
    }
    Ok(out)
}

pub fn load_norms(path: &Path) -> Result<Vec<MafiEntry>, MafiError> {
    let text = std::fs::read_to_string(path).map_err(|e| MafiError::MalformedLine {
        line: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    parse_norms(&text)
}
