//! WER-vs-SNR curves and the effective SNR gain.
//!
//! The gain of an audio-visual system is read off two curves: the
//! audio-only WER at a reference SNR defines a target WER, and the gain is
//! how many dB lower the audio-visual curve reaches that same WER. Curves are
//! piecewise linear between samples and never extrapolated.

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GainError {
    #[error("curve needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("SNR values must be strictly increasing (at point {0})")]
    NotIncreasing(usize),
    #[error("WER {wer} at point {index} is outside [0, 100]")]
    WerOutOfRange { index: usize, wer: f64 },
    #[error("non-finite value at point {0}")]
    NonFinite(usize),
    #[error("SNR {snr} dB is outside the curve range [{min}, {max}] dB")]
    OutOfRange { snr: f64, min: f64, max: f64 },
    #[error("reference SNR {snr} dB is outside the audio-only range [{min}, {max}] dB")]
    RefOutOfRange { snr: f64, min: f64, max: f64 },
    #[error("audio-visual WER stays above the reference WER {ref_wer:.2}% over its whole range")]
    NoCrossing { ref_wer: f64 },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub snr_db: f64,
    /// Percent, 0 to 100.
    pub wer: f64,
}

/// A validated WER-vs-SNR curve: strictly increasing SNR, WER in [0, 100],
/// at least two points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCurve", into = "RawCurve")]
pub struct WerCurve {
    label: String,
    points: Vec<CurvePoint>,
}

#[derive(Serialize, Deserialize)]
struct RawCurve {
    label: String,
    points: Vec<CurvePoint>,
}

impl TryFrom<RawCurve> for WerCurve {
    type Error = GainError;

    fn try_from(raw: RawCurve) -> Result<Self, Self::Error> {
        WerCurve::new(raw.label, raw.points)
    }
}

impl From<WerCurve> for RawCurve {
    fn from(c: WerCurve) -> Self {
        RawCurve {
            label: c.label,
            points: c.points,
        }
    }
}

impl WerCurve {
    pub fn new(label: impl Into<String>, points: Vec<CurvePoint>) -> Result<Self, GainError> {
        if points.len() < 2 {
            return Err(GainError::TooFewPoints(points.len()));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.snr_db.is_finite() || !p.wer.is_finite() {
                return Err(GainError::NonFinite(i));
            }
            if !(0.0..=100.0).contains(&p.wer) {
                return Err(GainError::WerOutOfRange {
                    index: i,
                    wer: p.wer,
                });
            }
            if i > 0 && p.snr_db <= points[i - 1].snr_db {
                return Err(GainError::NotIncreasing(i));
            }
        }
        Ok(Self {
            label: label.into(),
            points,
        })
    }

    /// Convenience constructor from `(snr_db, wer)` pairs.
    pub fn from_pairs(label: impl Into<String>, pairs: &[(f64, f64)]) -> Result<Self, GainError> {
        Self::new(
            label,
            pairs
                .iter()
                .map(|&(snr_db, wer)| CurvePoint { snr_db, wer })
                .collect(),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn min_snr(&self) -> f64 {
        self.points[0].snr_db
    }

    pub fn max_snr(&self) -> f64 {
        self.points[self.points.len() - 1].snr_db
    }

    /// Piecewise-linear WER at `snr`; exact at sample points.
    pub fn interpolate(&self, snr: f64) -> Result<f64, GainError> {
        if !(self.min_snr()..=self.max_snr()).contains(&snr) {
            return Err(GainError::OutOfRange {
                snr,
                min: self.min_snr(),
                max: self.max_snr(),
            });
        }
        let hi = self.points.partition_point(|p| p.snr_db < snr);
        let right = self.points[hi];
        if right.snr_db == snr {
            return Ok(right.wer);
        }
        let left = self.points[hi - 1];
        let t = (snr - left.snr_db) / (right.snr_db - left.snr_db);
        Ok(left.wer + t * (right.wer - left.wer))
    }

    /// Same curve with every SNR shifted by `delta_db`.
    pub fn shifted(&self, delta_db: f64) -> WerCurve {
        WerCurve {
            label: self.label.clone(),
            points: self
                .points
                .iter()
                .map(|p| CurvePoint {
                    snr_db: p.snr_db + delta_db,
                    wer: p.wer,
                })
                .collect(),
        }
    }
}

/// Free-function form of [`WerCurve::interpolate`].
pub fn interpolate(curve: &WerCurve, snr: f64) -> Result<f64, GainError> {
    curve.interpolate(snr)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainResult {
    pub gain_db: f64,
    pub ref_snr_db: f64,
    pub ref_wer: f64,
    /// SNR at which the audio-visual curve reaches `ref_wer`; for bounded
    /// results, the lowest measured SNR.
    pub crossing_snr_db: f64,
    /// The true gain exceeds the measured range; `gain_db` is a lower bound.
    pub bounded: bool,
}

/// Effective SNR gain of `av` against the audio-only curve `ao` at
/// `ref_snr` dB.
///
/// The crossing is the largest SNR where `av` equals the reference WER
/// coming down from above (at or above it immediately to the left), so noisy
/// dips at low SNR never inflate the gain. If `av` is already at or below the
/// reference WER at its lowest SNR and has no such crossing, the result is
/// flagged `bounded` with the gain measured to the lowest SNR. Where `av`
/// sits flat at the reference WER the crossing is the plateau point nearest
/// `ref_snr`, so identical curves always give a gain of 0.
pub fn effective_snr_gain(
    ao: &WerCurve,
    av: &WerCurve,
    ref_snr: f64,
) -> Result<GainResult, GainError> {
    if !(ao.min_snr()..=ao.max_snr()).contains(&ref_snr) {
        return Err(GainError::RefOutOfRange {
            snr: ref_snr,
            min: ao.min_snr(),
            max: ao.max_snr(),
        });
    }
    let ref_wer = ao.interpolate(ref_snr)?;
    let pts = av.points();

    for i in (0..pts.len() - 1).rev() {
        let (a, b) = (pts[i], pts[i + 1]);
        if !(a.wer >= ref_wer && ref_wer >= b.wer) {
            continue;
        }
        let x = if a.wer > b.wer {
            a.snr_db + (b.snr_db - a.snr_db) * (a.wer - ref_wer) / (a.wer - b.wer)
        } else {
            // flat at ref_wer: every point ties, take the one nearest ref_snr
            ref_snr.clamp(a.snr_db, b.snr_db)
        };
        // A crossing exactly at the left sample needs support from the
        // segment before it, which the next iteration examines.
        if x > a.snr_db || i == 0 {
            return Ok(GainResult {
                gain_db: ref_snr - x,
                ref_snr_db: ref_snr,
                ref_wer,
                crossing_snr_db: x,
                bounded: false,
            });
        }
    }

    if pts[0].wer <= ref_wer {
        return Ok(GainResult {
            gain_db: ref_snr - av.min_snr(),
            ref_snr_db: ref_snr,
            ref_wer,
            crossing_snr_db: av.min_snr(),
            bounded: true,
        });
    }
    Err(GainError::NoCrossing { ref_wer })
}

/// Audio-only / audio-visual curve pair for one system on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemCurves {
    pub system: String,
    pub dataset: String,
    pub ao: WerCurve,
    pub av: WerCurve,
}

/// One cell of a gain table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainCell {
    pub system: String,
    pub dataset: String,
    pub ref_snr_db: f64,
    /// `Err` holds the reason the cell is unavailable.
    pub result: Result<GainResult, String>,
}

/// Gains for every system × dataset × reference SNR. Per-pair failures
/// become unavailable cells instead of aborting the table.
pub fn gain_report(systems: &[SystemCurves], ref_snrs: &[f64]) -> Vec<GainCell> {
    let mut cells = Vec::with_capacity(systems.len() * ref_snrs.len());
    for s in systems {
        for &r in ref_snrs {
            cells.push(GainCell {
                system: s.system.clone(),
                dataset: s.dataset.clone(),
                ref_snr_db: r,
                result: effective_snr_gain(&s.ao, &s.av, r).map_err(|e| e.to_string()),
            });
        }
    }
    cells
}

/// Parses the curve CSV: `# label: NAME` comment, optional
/// `snr_db,wer_percent` header, then one `snr,wer` pair per line.
pub fn parse_curve_csv(text: &str, source: &str) -> Result<WerCurve, GainError> {
    let mut label = None;
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |message: String| GainError::Parse {
            path: source.to_string(),
            line: idx + 1,
            message,
        };
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(l) = comment.trim().strip_prefix("label:") {
                label = Some(l.trim().to_string());
            }
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err(format!("expected two fields, got `{line}`")));
        };
        if points.is_empty() && a == "snr_db" {
            continue;
        }
        let snr_db: f64 = a.parse().map_err(|_| err(format!("bad SNR `{a}`")))?;
        let wer: f64 = b.parse().map_err(|_| err(format!("bad WER `{b}`")))?;
        points.push(CurvePoint { snr_db, wer });
    }
    let label = label.unwrap_or_else(|| {
        std::path::Path::new(source)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    WerCurve::new(label, points).map_err(|e| GainError::Parse {
        path: source.to_string(),
        line: 0,
        message: e.to_string(),
    })
}

pub fn format_curve_csv(curve: &WerCurve) -> String {
    let mut out = format!("# label: {}\nsnr_db,wer_percent\n", curve.label());
    for p in curve.points() {
        out.push_str(&format!("{},{}\n", p.snr_db, p.wer));
    }
    out
}
