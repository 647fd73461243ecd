//! Word-timed mouth occlusion.
//!
//! Word timings from a forced aligner (CTM or Praat TextGrid) are mapped to
//! video frames, and for every word of at least three frames a window of a
//! third of its frames is planned at the word's start or centre. Windows are
//! then applied to frame sequences with a deterministic region fill.

mod ctm;
mod frames;
mod textgrid;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scoring::Token;

pub use ctm::{format_ctm, parse_ctm};
pub use frames::{apply, apply_dir, list_frames, read_frame, write_frame, Frame};
pub use textgrid::{format_textgrid, parse_textgrid};

/// Current manifest schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// Timestamps are compared with this slack (seconds) to absorb decimal
/// round-off in aligner output.
pub const TIME_EPSILON: f64 = 1e-6;

/// Pixel value used by [`Fill::SolidGray`].
pub const MID_GRAY: u8 = 128;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum OcclusionError {
    #[error("line {line_no}: {message}")]
    MalformedLine { line_no: usize, message: String },
    #[error("utterance `{utt_id}`: word {word_index} overlaps the previous word")]
    OverlapDetected { utt_id: String, word_index: usize },
    #[error("tier `{0}` not found")]
    TierNotFound(String),
    #[error("malformed TextGrid: {0}")]
    MalformedFile(String),
    #[error("invalid word span: {0}")]
    InvalidSpan(String),
    #[error("fps must be positive and finite, got {0}")]
    InvalidFps(f64),
    #[error("window ends at frame {end_frame} but only {frames} frames are available")]
    FrameIndexOutOfRange { end_frame: usize, frames: usize },
    #[error("region {region} does not fit a {width}x{height} frame")]
    RegionOutOfBounds {
        region: String,
        width: u32,
        height: u32,
    },
    #[error("frame {index}: {message}")]
    BadFrame { index: usize, message: String },
    #[error("{0}")]
    Io(String),
}

/// Timing of one aligned word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordSpan {
    pub utt_id: String,
    pub word: Token,
    pub t_start: f64,
    pub t_end: f64,
}

impl WordSpan {
    pub fn new(
        utt_id: impl Into<String>,
        word: Token,
        t_start: f64,
        t_end: f64,
    ) -> Result<Self, OcclusionError> {
        if !(t_start.is_finite() && t_end.is_finite()) || t_start < 0.0 || t_end <= t_start {
            return Err(OcclusionError::InvalidSpan(format!(
                "{word} [{t_start}, {t_end})"
            )));
        }
        Ok(Self {
            utt_id: utt_id.into(),
            word,
            t_start,
            t_end,
        })
    }
}

/// Spans grouped by utterance id, each group time-ordered.
pub type AlignedUtterances = BTreeMap<String, Vec<WordSpan>>;

/// Sorts one utterance's spans by start time and rejects overlaps.
pub fn validate_spans(utt_id: &str, spans: &mut [WordSpan]) -> Result<(), OcclusionError> {
    spans.sort_by(|a, b| a.t_start.total_cmp(&b.t_start));
    for i in 1..spans.len() {
        if spans[i].t_start < spans[i - 1].t_end - TIME_EPSILON {
            return Err(OcclusionError::OverlapDetected {
                utt_id: utt_id.to_string(),
                word_index: i,
            });
        }
    }
    Ok(())
}

/// Half-open frame range `[start_frame, end_frame)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrameWindow {
    pub start_frame: usize,
    pub end_frame: usize,
}

impl FrameWindow {
    pub fn len(&self) -> usize {
        self.end_frame - self.start_frame
    }

    pub fn is_empty(&self) -> bool {
        self.end_frame <= self.start_frame
    }

    pub fn contains(&self, frame: usize) -> bool {
        (self.start_frame..self.end_frame).contains(&frame)
    }

    fn offset(self, by: usize) -> FrameWindow {
        FrameWindow {
            start_frame: self.start_frame + by,
            end_frame: self.end_frame + by,
        }
    }
}

/// Frames touched by a word: `floor(t_start * fps)` to `ceil(t_end * fps)`,
/// never empty.
pub fn word_frames(span: &WordSpan, fps: f64) -> FrameWindow {
    let start = (span.t_start * fps + TIME_EPSILON).floor().max(0.0) as usize;
    let end = (span.t_end * fps - TIME_EPSILON).ceil().max(0.0) as usize;
    FrameWindow {
        start_frame: start,
        end_frame: end.max(start + 1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Initial,
    Middle,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Position::Initial => "initial",
            Position::Middle => "middle",
        })
    }
}

impl FromStr for Position {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "initial" => Ok(Position::Initial),
            "middle" => Ok(Position::Middle),
            other => Err(format!("unknown position `{other}`")),
        }
    }
}

/// Minimum word length, in frames, that receives an occlusion window.
pub const MIN_OCCLUDED_FRAMES: usize = 3;

/// Number of frames to occlude in an `n_frames` word: a third, rounded half
/// up, at least one.
pub fn window_len(n_frames: usize) -> usize {
    ((2 * n_frames + 3) / 6).max(1)
}

/// Word-relative occlusion window, or `None` for words under three frames.
pub fn occlusion_window(n_frames: usize, position: Position) -> Option<FrameWindow> {
    if n_frames < MIN_OCCLUDED_FRAMES {
        return None;
    }
    let m = window_len(n_frames);
    let start = match position {
        Position::Initial => 0,
        Position::Middle => (n_frames - m) / 2,
    };
    Some(FrameWindow {
        start_frame: start,
        end_frame: start + m,
    })
}

/// Pixel rectangle, or the whole frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    #[default]
    FullFrame,
    Rect {
        x: u32,
        y: u32,
        w: u32,
        h: u32,
    },
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::FullFrame => f.write_str("full-frame"),
            Region::Rect { x, y, w, h } => write!(f, "{x},{y},{w},{h}"),
        }
    }
}

impl FromStr for Region {
    type Err = String;

    /// `full-frame` or `x,y,w,h`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "full-frame" {
            return Ok(Region::FullFrame);
        }
        let parts: Vec<u32> = s
            .split(',')
            .map(|p| p.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("region must be `full-frame` or `x,y,w,h`, got `{s}`"))?;
        match parts[..] {
            [x, y, w, h] if w > 0 && h > 0 => Ok(Region::Rect { x, y, w, h }),
            _ => Err(format!(
                "region must be `full-frame` or `x,y,w,h`, got `{s}`"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fill {
    #[default]
    SolidGray,
    FrameMean,
    Blur,
}

impl fmt::Display for Fill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fill::SolidGray => "solid-gray",
            Fill::FrameMean => "frame-mean",
            Fill::Blur => "blur",
        })
    }
}

impl FromStr for Fill {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "solid-gray" => Ok(Fill::SolidGray),
            "frame-mean" => Ok(Fill::FrameMean),
            "blur" => Ok(Fill::Blur),
            other => Err(format!("unknown fill `{other}`")),
        }
    }
}

/// A planned window and the word it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedWindow {
    #[serde(flatten)]
    pub window: FrameWindow,
    pub word: Token,
    pub word_index: usize,
    pub word_frames: FrameWindow,
}

/// A word that received no window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedWord {
    pub word: Token,
    pub word_index: usize,
    pub n_frames: usize,
    pub reason: String,
}

/// Occlusion plan for one utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcclusionManifest {
    pub utt_id: String,
    pub fps: f64,
    pub position: Position,
    pub region: Region,
    pub fill: Fill,
    pub windows: Vec<PlannedWindow>,
    pub skipped: Vec<SkippedWord>,
}

impl OcclusionManifest {
    /// One past the last occluded frame (0 when nothing is occluded).
    pub fn max_end_frame(&self) -> usize {
        self.windows
            .iter()
            .map(|w| w.window.end_frame)
            .max()
            .unwrap_or(0)
    }

    pub fn is_occluded(&self, frame: usize) -> bool {
        self.windows.iter().any(|w| w.window.contains(frame))
    }
}

/// Versioned manifest file holding one plan per utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub schema_version: u32,
    pub manifests: Vec<OcclusionManifest>,
}

impl ManifestFile {
    pub fn new(manifests: Vec<OcclusionManifest>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            manifests,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, OcclusionError> {
        let file: ManifestFile = serde_json::from_str(text)
            .map_err(|e| OcclusionError::MalformedFile(format!("manifest: {e}")))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(OcclusionError::MalformedFile(format!(
                "unsupported manifest schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        Ok(file)
    }
}

/// Plans occlusion windows for one utterance's spans.
pub fn plan(
    spans: &[WordSpan],
    fps: f64,
    position: Position,
    region: Region,
    fill: Fill,
) -> Result<OcclusionManifest, OcclusionError> {
    if !(fps.is_finite() && fps > 0.0) {
        return Err(OcclusionError::InvalidFps(fps));
    }
    let utt_id = spans.first().map(|s| s.utt_id.clone()).unwrap_or_default();
    if let Some(other) = spans.iter().find(|s| s.utt_id != utt_id) {
        return Err(OcclusionError::InvalidSpan(format!(
            "plan covers one utterance, found `{utt_id}` and `{}`",
            other.utt_id
        )));
    }
    let mut ordered = spans.to_vec();
    validate_spans(&utt_id, &mut ordered)?;

    let mut windows = Vec::new();
    let mut skipped = Vec::new();
    for (word_index, span) in ordered.iter().enumerate() {
        let frames = word_frames(span, fps);
        match occlusion_window(frames.len(), position) {
            Some(w) => windows.push(PlannedWindow {
                window: w.offset(frames.start_frame),
                word: span.word.clone(),
                word_index,
                word_frames: frames,
            }),
            None => skipped.push(SkippedWord {
                word: span.word.clone(),
                word_index,
                n_frames: frames.len(),
                reason: format!(
                    "word spans {} frame(s), fewer than {MIN_OCCLUDED_FRAMES}",
                    frames.len()
                ),
            }),
        }
    }
    // Windows never reach a word's last frame, the only frame a following
    // word can share, so time-ordered words give disjoint windows.
    debug_assert!(windows
        .windows(2)
        .all(|p| p[0].window.end_frame <= p[1].window.start_frame));

    Ok(OcclusionManifest {
        utt_id,
        fps,
        position,
        region,
        fill,
        windows,
        skipped,
    })
}

/// Plans every utterance in `utterances`.
pub fn plan_all(
    utterances: &AlignedUtterances,
    fps: f64,
    position: Position,
    region: Region,
    fill: Fill,
) -> Result<ManifestFile, OcclusionError> {
    let manifests = utterances
        .values()
        .map(|spans| plan(spans, fps, position, region, fill))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ManifestFile::new(manifests))
}
