//! Synthetic recognizers with a logistic accuracy-vs-SNR curve.
//!
//! Errors are injected word by word with common random numbers: each word
//! draws the same uniforms at every SNR and for both the audio-only and the
//! audio-visual recognizer, so raising accuracy only ever removes errors.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gaincurve::{CurvePoint, GainError, WerCurve};
use crate::scoring::io::{score_pairs, TranscriptError, Transcripts};
use crate::scoring::{normalize, ErrorCounts, ScoringError};
use crate::util::derive_seed;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid recognizer: {0}")]
    InvalidRecognizer(String),
    #[error("reference corpus has no words")]
    EmptyCorpus,
    #[error("SNR grid must be non-empty and strictly increasing")]
    BadGrid,
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error(transparent)]
    Curve(#[from] GainError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
}

/// Conditional probabilities of each error type given that an error occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMix {
    pub p_sub: f64,
    pub p_del: f64,
    pub p_ins: f64,
}

impl Default for ErrorMix {
    fn default() -> Self {
        Self {
            p_sub: 0.7,
            p_del: 0.2,
            p_ins: 0.1,
        }
    }
}

impl ErrorMix {
    pub fn new(p_sub: f64, p_del: f64, p_ins: f64) -> Result<Self, SimError> {
        let mix = Self {
            p_sub,
            p_del,
            p_ins,
        };
        mix.validate()?;
        Ok(mix)
    }

    fn validate(&self) -> Result<(), SimError> {
        let parts = [self.p_sub, self.p_del, self.p_ins];
        if parts.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(SimError::InvalidRecognizer(
                "error mix probabilities must be non-negative".into(),
            ));
        }
        let total: f64 = parts.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(SimError::InvalidRecognizer(format!(
                "error mix sums to {total}, not 1"
            )));
        }
        Ok(())
    }

    fn pick(&self, u: f64) -> ErrorKind {
        if u < self.p_sub {
            ErrorKind::Substitute
        } else if u < self.p_sub + self.p_del {
            ErrorKind::Delete
        } else {
            ErrorKind::Insert
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ErrorKind {
    Substitute,
    Delete,
    Insert,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRecognizer {
    /// Accuracy approached at high SNR.
    pub floor_acc: f64,
    pub midpoint_db: f64,
    /// Logistic slope in 1/dB.
    pub slope: f64,
    /// Left shift of the accuracy curve; 0 for an audio-only system.
    pub av_shift_db: f64,
    pub error_mix: ErrorMix,
}

impl Default for SyntheticRecognizer {
    fn default() -> Self {
        Self {
            floor_acc: 0.98,
            midpoint_db: -6.0,
            slope: 0.5,
            av_shift_db: 0.0,
            error_mix: ErrorMix::default(),
        }
    }
}

impl SyntheticRecognizer {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.floor_acc > 0.0 && self.floor_acc <= 1.0) {
            return Err(SimError::InvalidRecognizer(format!(
                "floor_acc {} outside (0, 1]",
                self.floor_acc
            )));
        }
        if !(self.slope > 0.0 && self.slope.is_finite()) {
            return Err(SimError::InvalidRecognizer(format!(
                "slope {} must be positive",
                self.slope
            )));
        }
        if !self.midpoint_db.is_finite() || !self.av_shift_db.is_finite() {
            return Err(SimError::InvalidRecognizer("non-finite parameter".into()));
        }
        self.error_mix.validate()
    }

    /// The same recognizer with its curve moved `shift_db` to the left.
    pub fn with_shift(self, shift_db: f64) -> Self {
        Self {
            av_shift_db: shift_db,
            ..self
        }
    }
}

/// Probability that a word is recognized correctly at `snr_db`.
pub fn word_accuracy(rec: &SyntheticRecognizer, snr_db: f64) -> f64 {
    let z = rec.slope * (snr_db + rec.av_shift_db - rec.midpoint_db);
    rec.floor_acc / (1.0 + (-z).exp())
}

/// Sorted distinct words of a transcript set, used as the substitution and
/// insertion vocabulary.
pub fn vocabulary(refs: &Transcripts) -> Vec<String> {
    let set: BTreeSet<String> = refs
        .values()
        .flat_map(|t| normalize(t))
        .map(String::from)
        .collect();
    set.into_iter().collect()
}

fn other_word(vocab: &[String], word: &str, idx: usize) -> String {
    if vocab.is_empty() {
        return format!("{word}X");
    }
    let pick = &vocab[idx % vocab.len()];
    if pick != word {
        return pick.clone();
    }
    if vocab.len() > 1 {
        vocab[(idx + 1) % vocab.len()].clone()
    } else {
        format!("{word}X")
    }
}

fn corrupt(
    words: &[String],
    accuracy: f64,
    mix: &ErrorMix,
    vocab: &[String],
    rng: &mut ChaCha8Rng,
) -> Vec<String> {
    let mut out = Vec::with_capacity(words.len() + 2);
    for word in words {
        // fixed draws per word keep the streams aligned across SNRs
        let u_err: f64 = rng.random();
        let u_kind: f64 = rng.random();
        let idx = rng.random::<u32>() as usize;
        if u_err < accuracy {
            out.push(word.clone());
            continue;
        }
        match mix.pick(u_kind) {
            ErrorKind::Substitute => out.push(other_word(vocab, word, idx)),
            ErrorKind::Delete => {}
            ErrorKind::Insert => {
                out.push(word.clone());
                let extra = vocab.get(idx % vocab.len().max(1));
                out.push(extra.cloned().unwrap_or_else(|| format!("{word}X")));
            }
        }
    }
    out
}

/// Simulated hypotheses for `refs` at `snr_db`. Each utterance gets its own
/// stream derived from `seed` and its position, so results do not depend on
/// thread scheduling or on the SNR.
pub fn simulate(
    refs: &Transcripts,
    rec: &SyntheticRecognizer,
    snr_db: f64,
    seed: u64,
) -> Transcripts {
    let vocab = vocabulary(refs);
    simulate_with_vocab(refs, rec, snr_db, seed, &vocab)
}

fn simulate_with_vocab(
    refs: &Transcripts,
    rec: &SyntheticRecognizer,
    snr_db: f64,
    seed: u64,
    vocab: &[String],
) -> Transcripts {
    let accuracy = word_accuracy(rec, snr_db);
    let entries: Vec<(&String, &String)> = refs.iter().collect();
    entries
        .par_iter()
        .enumerate()
        .map(|(i, (id, text))| {
            let words: Vec<String> = normalize(text).into_iter().map(String::from).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let hyp = corrupt(&words, accuracy, &rec.error_mix, vocab, &mut rng);
            ((*id).clone(), hyp.join(" "))
        })
        .collect()
}

/// Corpus error counts of simulated output at one SNR.
pub fn simulate_counts(
    refs: &Transcripts,
    rec: &SyntheticRecognizer,
    snr_db: f64,
    seed: u64,
) -> Result<ErrorCounts, SimError> {
    let hyps = simulate(refs, rec, snr_db, seed);
    let scored = score_pairs(refs, &hyps)?;
    Ok(ErrorCounts::sum(scored.iter().map(|s| &s.alignment)))
}

fn curve_for(
    label: &str,
    refs: &Transcripts,
    rec: &SyntheticRecognizer,
    grid: &[f64],
    seed: u64,
    vocab: &[String],
) -> Result<WerCurve, SimError> {
    let points = grid
        .par_iter()
        .map(|&snr| {
            let hyps = simulate_with_vocab(refs, rec, snr, seed, vocab);
            let scored = score_pairs(refs, &hyps)?;
            let wer = ErrorCounts::sum(scored.iter().map(|s| &s.alignment)).wer()?;
            Ok(CurvePoint {
                snr_db: snr,
                wer: wer.min(100.0),
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(WerCurve::new(label, points)?)
}

/// WER-vs-SNR curves (percent) for an audio-only and an audio-visual
/// recognizer scored on the same corpus with the same seed.
pub fn sweep(
    ao: &SyntheticRecognizer,
    av: &SyntheticRecognizer,
    refs: &Transcripts,
    grid: &[f64],
    seed: u64,
) -> Result<(WerCurve, WerCurve), SimError> {
    ao.validate()?;
    av.validate()?;
    if grid.is_empty()
        || grid.windows(2).any(|w| w[1] <= w[0])
        || grid.iter().any(|g| !g.is_finite())
    {
        return Err(SimError::BadGrid);
    }
    let vocab = vocabulary(refs);
    if vocab.is_empty() {
        return Err(SimError::EmptyCorpus);
    }
    let ao_curve = curve_for("AO", refs, ao, grid, seed, &vocab)?;
    let av_curve = curve_for("AV", refs, av, grid, seed, &vocab)?;
    Ok((ao_curve, av_curve))
}

/// Evenly spaced grid from `lo` to `hi` inclusive.
pub fn snr_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, SimError> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(SimError::BadGrid);
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

const ONSETS: [&str; 12] = ["B", "D", "F", "G", "K", "L", "M", "N", "P", "R", "S", "T"];
const NUCLEI: [&str; 5] = ["A", "E", "I", "O", "U"];

/// Deterministic pseudo-word for vocabulary index `i`.
pub fn pseudo_word(mut i: usize) -> String {
    let mut word = String::new();
    loop {
        word.push_str(ONSETS[i % ONSETS.len()]);
        i /= ONSETS.len();
        word.push_str(NUCLEI[i % NUCLEI.len()]);
        i /= NUCLEI.len();
        if i == 0 {
            break;
        }
        i -= 1;
    }
    word
}

/// Shape of a generated reference corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub n_words: usize,
    pub vocab_size: usize,
    pub words_per_utt: usize,
    /// Zipf exponent of word frequencies.
    pub zipf_exponent: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            n_words: 50_000,
            vocab_size: 1000,
            words_per_utt: 10,
            zipf_exponent: 1.0,
        }
    }
}

/// Reference transcripts of pseudo-words with Zipf-distributed frequencies.
pub fn synthetic_corpus(spec: &CorpusSpec, seed: u64) -> Result<Transcripts, SimError> {
    if spec.n_words == 0 || spec.vocab_size == 0 || spec.words_per_utt == 0 {
        return Err(SimError::EmptyCorpus);
    }
    let zipf = Zipf::new(spec.vocab_size as f64, spec.zipf_exponent)
        .map_err(|e| SimError::InvalidRecognizer(e.to_string()))?;
    let vocab: Vec<String> = (0..spec.vocab_size).map(pseudo_word).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_utts = spec.n_words.div_ceil(spec.words_per_utt);
    let width = n_utts.to_string().len();
    let mut out = Transcripts::new();
    let mut remaining = spec.n_words;
    for u in 0..n_utts {
        let len = spec.words_per_utt.min(remaining);
        remaining -= len;
        let words: Vec<&str> = (0..len)
            .map(|_| vocab[zipf.sample(&mut rng) as usize - 1].as_str())
            .collect();
        out.insert(format!("utt{u:0width$}"), words.join(" "));
    }
    Ok(out)
}

/// Settings read from a flat `key = value` sweep config.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub recognizer: SyntheticRecognizer,
    pub grid: Vec<f64>,
    pub corpus: CorpusSpec,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            recognizer: SyntheticRecognizer::default(),
            grid: snr_grid(-15.0, 10.0, 1.0).expect("static grid"),
            corpus: CorpusSpec::default(),
            seed: 0,
        }
    }
}

impl SimConfig {
    /// Audio-only recognizer: the configured one with no shift.
    pub fn audio_only(&self) -> SyntheticRecognizer {
        self.recognizer.with_shift(0.0)
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .trim()
                .parse()
                .map_err(|_| format!("bad value `{value}` for `{key}`"))
        }
        let rec = &mut self.recognizer;
        match key.trim() {
            "floor_acc" => rec.floor_acc = num(key, value)?,
            "midpoint_db" => rec.midpoint_db = num(key, value)?,
            "slope" => rec.slope = num(key, value)?,
            "av_shift_db" => rec.av_shift_db = num(key, value)?,
            "p_sub" => rec.error_mix.p_sub = num(key, value)?,
            "p_del" => rec.error_mix.p_del = num(key, value)?,
            "p_ins" => rec.error_mix.p_ins = num(key, value)?,
            "error_mix" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|p| num(key, p))
                    .collect::<Result<_, _>>()?;
                let [s, d, i] = parts[..] else {
                    return Err("error_mix needs three comma-separated values".into());
                };
                rec.error_mix = ErrorMix {
                    p_sub: s,
                    p_del: d,
                    p_ins: i,
                };
            }
            "snr_grid" => {
                self.grid = value
                    .split(',')
                    .map(|p| num(key, p))
                    .collect::<Result<_, _>>()?;
            }
            "snr_range" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|p| num(key, p))
                    .collect::<Result<_, _>>()?;
                let [lo, hi, step] = parts[..] else {
                    return Err("snr_range needs `lo,hi,step`".into());
                };
                self.grid = snr_grid(lo, hi, step).map_err(|e| e.to_string())?;
            }
            "n_words" => self.corpus.n_words = num(key, value)?,
            "vocab_size" => self.corpus.vocab_size = num(key, value)?,
            "words_per_utt" => self.corpus.words_per_utt = num(key, value)?,
            "zipf_exponent" => self.corpus.zipf_exponent = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.recognizer.validate()?;
        if self.grid.is_empty() || self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SimError::BadGrid);
        }
        Ok(())
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_sim_config(text: &str) -> Result<SimConfig, SimError> {
    let mut cfg = SimConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| SimError::Config {
            line: idx + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected `key = value`".into()))?;
        cfg.set(key, value).map_err(err)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

impl fmt::Display for SimConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.recognizer;
        writeln!(f, "floor_acc = {}", r.floor_acc)?;
        writeln!(f, "midpoint_db = {}", r.midpoint_db)?;
        writeln!(f, "slope = {}", r.slope)?;
        writeln!(f, "av_shift_db = {}", r.av_shift_db)?;
        writeln!(
            f,
            "error_mix = {},{},{}",
            r.error_mix.p_sub, r.error_mix.p_del, r.error_mix.p_ins
        )?;
        let grid: Vec<String> = self.grid.iter().map(f64::to_string).collect();
        writeln!(f, "snr_grid = {}", grid.join(","))?;
        writeln!(f, "n_words = {}", self.corpus.n_words)?;
        writeln!(f, "vocab_size = {}", self.corpus.vocab_size)?;
        writeln!(f, "words_per_utt = {}", self.corpus.words_per_utt)?;
        writeln!(f, "zipf_exponent = {}", self.corpus.zipf_exponent)?;
        writeln!(f, "seed = {}", self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective_snr_gain;

    fn small_corpus(n: usize) -> Transcripts {
        synthetic_corpus(
            &CorpusSpec {
                n_words: n,
                vocab_size: 200,
                words_per_utt: 8,
                zipf_exponent: 1.0,
            },
            3,
        )
        .unwrap()
    }

    #[test]
    fn accuracy_midpoint_and_asymptote() {
        let rec = SyntheticRecognizer::default().with_shift(2.0);
        assert!((word_accuracy(&rec, -8.0) - 0.49).abs() < 1e-12);
        assert!((word_accuracy(&rec, 1e4) - 0.98).abs() < 1e-12);
    }

    #[test]
    fn shifted_curves_are_translates() {
        let ao = SyntheticRecognizer::default();
        let av = ao.with_shift(4.0);
        for snr in [-20.0, -7.5, 0.0, 3.3] {
            assert!((word_accuracy(&av, snr - 4.0) - word_accuracy(&ao, snr)).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_recognizers() {
        let bad = SyntheticRecognizer {
            floor_acc: 1.2,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SyntheticRecognizer {
            slope: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(ErrorMix::new(0.5, 0.2, 0.2).is_err());
        assert!(ErrorMix::new(0.5, 0.3, 0.2).is_ok());
    }

    #[test]
    fn perfect_accuracy_copies_references() {
        let refs = small_corpus(200);
        let rec = SyntheticRecognizer {
            floor_acc: 1.0,
            slope: 1e6,
            ..Default::default()
        };
        assert_eq!(simulate(&refs, &rec, 100.0, 1), refs);
    }

    #[test]
    fn zero_accuracy_all_deletions() {
        let refs = small_corpus(200);
        let rec = SyntheticRecognizer {
            slope: 1e6,
            error_mix: ErrorMix::new(0.0, 1.0, 0.0).unwrap(),
            ..Default::default()
        };
        let hyps = simulate(&refs, &rec, -1000.0, 1);
        assert!(hyps.values().all(String::is_empty));
        let counts = simulate_counts(&refs, &rec, -1000.0, 1).unwrap();
        assert_eq!(counts.wer().unwrap(), 100.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let refs = small_corpus(400);
        let rec = SyntheticRecognizer::default();
        assert_eq!(
            simulate(&refs, &rec, -6.0, 5),
            simulate(&refs, &rec, -6.0, 5)
        );
        assert_ne!(
            simulate(&refs, &rec, -6.0, 5),
            simulate(&refs, &rec, -6.0, 6)
        );
    }

    #[test]
    fn errors_nest_as_snr_rises() {
        let refs = small_corpus(2000);
        let rec = SyntheticRecognizer::default();
        let mut last = usize::MAX;
        for snr in [-15.0, -10.0, -6.0, -2.0, 2.0, 10.0] {
            let e = simulate_counts(&refs, &rec, snr, 11).unwrap().errors();
            assert!(e <= last, "{e} > {last} at {snr}");
            last = e;
        }
    }

    #[test]
    fn sweep_recovers_shift() {
        let refs = small_corpus(20_000);
        let ao = SyntheticRecognizer::default();
        let grid = snr_grid(-15.0, 10.0, 1.0).unwrap();
        let (a, v) = sweep(&ao, &ao.with_shift(3.7), &refs, &grid, 1).unwrap();
        let g = effective_snr_gain(&a, &v, 0.0).unwrap();
        assert!((g.gain_db - 3.7).abs() < 0.2, "{g:?}");
    }

    #[test]
    fn bad_grids() {
        let refs = small_corpus(10);
        let rec = SyntheticRecognizer::default();
        assert!(matches!(
            sweep(&rec, &rec, &refs, &[], 0),
            Err(SimError::BadGrid)
        ));
        assert!(matches!(
            sweep(&rec, &rec, &refs, &[1.0, 1.0], 0),
            Err(SimError::BadGrid)
        ));
        assert_eq!(snr_grid(-12.5, 10.0, 2.5).unwrap().len(), 10);
    }

    #[test]
    fn pseudo_words_are_distinct() {
        let words: BTreeSet<String> = (0..5000).map(pseudo_word).collect();
        assert_eq!(words.len(), 5000);
        assert_eq!(pseudo_word(0), "BA");
    }

    #[test]
    fn corpus_size() {
        let refs = small_corpus(1003);
        let n: usize = refs.values().map(|t| t.split_whitespace().count()).sum();
        assert_eq!(n, 1003);
        assert_eq!(refs.len(), 126);
    }

    #[test]
    fn config_parsing() {
        let cfg = parse_sim_config(
            "# demo\nfloor_acc = 0.95\nav_shift_db=4\nerror_mix = 0.6,0.3,0.1\nsnr_range = -10,10,5\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(cfg.recognizer.floor_acc, 0.95);
        assert_eq!(cfg.grid, vec![-10.0, -5.0, 0.0, 5.0, 10.0]);
        assert_eq!(cfg.audio_only().av_shift_db, 0.0);
        assert_eq!(cfg.seed, 9);
        assert_eq!(parse_sim_config(&cfg.to_string()).unwrap(), cfg);
        assert!(matches!(
            parse_sim_config("floor_acc 1\n"),
            Err(SimError::Config { line: 1, .. })
        ));
        assert!(matches!(
            parse_sim_config("\nbogus = 1\n"),
            Err(SimError::Config { line: 2, .. })
        ));
        assert!(parse_sim_config("p_sub = 0.9\n").is_err());
    }
}
