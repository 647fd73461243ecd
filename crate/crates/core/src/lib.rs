//! Evaluation toolkit for measuring how much audio-visual speech recognition
//! systems actually gain from the visual stream.
//!
//! The crate is organized by pipeline stage:
//!
//! * [`noisemix`]: deterministic pink noise and SNR-calibrated mixing.
//! * [`scoring`]: transcript normalization, Levenshtein alignment, WER and
//!   per-word error rates (IWER).
//! * [`gaincurve`]: WER-vs-SNR curves and the effective SNR gain.
//! * [`occlusion`]: word-timed mouth occlusion planning and frame fills.
//! * [`mafi`]: phonological-feature similarity scores, norm files and the
//!   Pearson correlation analysis against IWER.
//! * [`simkit`]: psychometric synthetic recognizers used as ground truth.
//! * [`report`]: end-to-end evaluation runs, tables and SVG plots.

pub mod gaincurve;
pub mod mafi;
pub mod noisemix;
pub mod occlusion;
pub mod report;
pub mod scoring;
pub mod simkit;
pub mod util;
pub mod wav;

pub use gaincurve::{effective_snr_gain, CurvePoint, GainResult, WerCurve};
pub use noisemix::{
    generate_pink_noise, measure_snr, mix_at_snr, AudioBuffer, MixSpec, PeakPolicy,
};
pub use scoring::{align, corpus_wer, iwer_table, normalize, AlignmentResult, Token, WordStats};
