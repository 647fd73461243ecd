//! Phone features, pronouncing lexicon, G2P lookup and the feature-based
//! similarity score.

use std::collections::{BTreeMap, HashMap};

use super::MafiError;
use crate::scoring::Token;

/// Number of phonological features per segment.
pub const N_FEATURES: usize = 14;

/// Feature names, in vector order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "consonantal",
    "sonorant",
    "voice",
    "nasal",
    "continuant",
    "labial",
    "round",
    "coronal",
    "anterior",
    "dorsal",
    "high",
    "low",
    "back",
    "tense",
];

/// Shipped ARPAbet → IPA → feature table.
pub const DEFAULT_FEATURE_TABLE: &str = include_str!("../../data/arpabet_features.csv");

/// Small sample lexicon in CMUdict format.
pub const SAMPLE_LEXICON: &str = include_str!("../../data/lexicon_sample.txt");

/// Ternary feature vector (`-1`, `0`, `+1`).
pub type FeatureVector = [i8; N_FEATURES];

/// One IPA segment with its feature vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhonSegment {
    pub phone: String,
    pub ipa: String,
    pub features: FeatureVector,
}

impl PhonSegment {
    /// Number of features in which the two segments differ.
    pub fn feature_distance(&self, other: &PhonSegment) -> usize {
        self.features
            .iter()
            .zip(&other.features)
            .filter(|(a, b)| a != b)
            .count()
    }
}

fn parse_feature_value(s: &str) -> Option<i8> {
    match s.trim() {
        "+" | "1" | "+1" => Some(1),
        "-" | "-1" => Some(-1),
        "0" => Some(0),
        _ => None,
    }
}

/// Phone symbol → segment.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    phones: BTreeMap<String, PhonSegment>,
}

impl FeatureTable {
    /// Parses `phone,ipa,f1..f14` CSV with a header row.
    pub fn parse(text: &str) -> Result<Self, MafiError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut phones = BTreeMap::new();
        for (idx, rec) in rdr.records().enumerate() {
            let line = idx + 2;
            let bad = |message: String| MafiError::MalformedLine { line, message };
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            if rec.len() != N_FEATURES + 2 {
                return Err(bad(format!(
                    "expected {} columns, got {}",
                    N_FEATURES + 2,
                    rec.len()
                )));
            }
            let phone = rec[0].trim().to_ascii_uppercase();
            let mut features = [0i8; N_FEATURES];
            for (k, f) in features.iter_mut().enumerate() {
                *f = parse_feature_value(&rec[k + 2])
                    .ok_or_else(|| bad(format!("bad feature value `{}`", &rec[k + 2])))?;
            }
            let seg = PhonSegment {
                phone: phone.clone(),
                ipa: rec[1].trim().to_string(),
                features,
            };
            if phones.insert(phone.clone(), seg).is_some() {
                return Err(bad(format!("duplicate phone {phone}")));
            }
        }
        Ok(Self { phones })
    }

    pub fn shipped() -> Self {
        Self::parse(DEFAULT_FEATURE_TABLE).expect("shipped feature table is valid")
    }

    pub fn get(&self, phone: &str) -> Option<&PhonSegment> {
        self.phones.get(phone)
    }

    pub fn phones(&self) -> impl Iterator<Item = &PhonSegment> {
        self.phones.values()
    }

    pub fn len(&self) -> usize {
        self.phones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phones.is_empty()
    }
}

/// Word → phone sequence (first listed pronunciation).
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    entries: HashMap<Token, Vec<String>>,
    table: FeatureTable,
}

fn strip_stress(phone: &str) -> String {
    phone
        .trim_end_matches(|c: char| c.is_ascii_digit())
        .to_ascii_uppercase()
}

impl Lexicon {
    /// Parses a CMUdict-style `WORD PH1 PH2 ...` file. `;;;` lines are
    /// comments, stress digits are dropped and `WORD(2)` variants are
    /// ignored when an earlier pronunciation exists. Every phone must be in
    /// `table`.
    pub fn parse(text: &str, table: FeatureTable) -> Result<Self, MafiError> {
        let mut entries: HashMap<Token, Vec<String>> = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with(";;;") {
                continue;
            }
            let mut fields = trimmed.split_whitespace();
            let head = fields.next().expect("non-empty line");
            let base = match head.find('(') {
                Some(p) if head.ends_with(')') => &head[..p],
                _ => head,
            };
            let word = Token::normalized(base).ok_or_else(|| MafiError::MalformedLine {
                line: line_no,
                message: format!("bad word `{head}`"),
            })?;
            let phones: Vec<String> = fields.map(strip_stress).collect();
            if phones.is_empty() {
                return Err(MafiError::MalformedLine {
                    line: line_no,
                    message: format!("no phones for `{head}`"),
                });
            }
            if let Some(p) = phones.iter().find(|p| table.get(p).is_none()) {
                return Err(MafiError::UnknownPhone {
                    line: line_no,
                    phone: p.clone(),
                });
            }
            entries.entry(word).or_insert(phones);
        }
        Ok(Self { entries, table })
    }

    /// Sample lexicon over the shipped feature table.
    pub fn sample() -> Self {
        Self::parse(SAMPLE_LEXICON, FeatureTable::shipped()).expect("sample lexicon is valid")
    }

    pub fn table(&self) -> &FeatureTable {
        &self.table
    }

    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pronunciation(&self, word: &Token) -> Option<&[String]> {
        self.entries.get(word).map(Vec::as_slice)
    }
}

/// Looks `word` up and returns its segments in order.
pub fn g2p(word: &Token, lexicon: &Lexicon) -> Result<Vec<PhonSegment>, MafiError> {
    let phones = lexicon
        .pronunciation(word)
        .ok_or_else(|| MafiError::OutOfVocabulary(word.to_string()))?;
    Ok(phones
        .iter()
        .map(|p| lexicon.table.get(p).expect("validated on load").clone())
        .collect())
}

/// Minimum global alignment cost between two segment sequences: unit
/// insertion/deletion, substitution costing the fraction of differing
/// features.
pub fn alignment_cost(target: &[PhonSegment], guess: &[PhonSegment]) -> f64 {
    let m = guess.len();
    let mut prev: Vec<f64> = (0..=m).map(|j| j as f64).collect();
    let mut cur = vec![0.0; m + 1];
    for (i, t) in target.iter().enumerate() {
        cur[0] = (i + 1) as f64;
        for (j, g) in guess.iter().enumerate() {
            let sub = prev[j] + t.feature_distance(g) as f64 / N_FEATURES as f64;
            cur[j + 1] = sub.min(prev[j + 1] + 1.0).min(cur[j] + 1.0);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m]
}

/// Similarity of a target word to speechreaders' guesses: the negated mean
/// over guesses of alignment cost divided by target length. 0 means every
/// guess was right; lower is less visually informative.
pub fn mafi_score(target: &[PhonSegment], guesses: &[Vec<PhonSegment>]) -> Result<f64, MafiError> {
    if target.is_empty() {
        return Err(MafiError::EmptyTarget);
    }
    if guesses.is_empty() {
        return Err(MafiError::NoGuesses);
    }
    let total: f64 = guesses
        .iter()
        .map(|g| alignment_cost(target, g) / target.len() as f64)
        .sum();
    let score = -(total / guesses.len() as f64);
    // keep an exact zero rather than -0.0
    Ok(if score == 0.0 { 0.0 } else { score })
}
