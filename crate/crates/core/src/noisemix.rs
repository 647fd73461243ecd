//! Pink-noise synthesis and SNR-calibrated mixing.
//!
//! SNR is always measured over the whole buffer as mean-square power, with no
//! voice-activity gating. Noise shorter than the speech is tiled, longer noise
//! is truncated from offset zero.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Peak level of freshly generated pink noise.
pub const PINK_PEAK: f64 = 0.9;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NoiseError {
    #[error("sample rate must be positive")]
    InvalidSampleRate,
    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),
    #[error("sample rates differ: speech {speech} Hz, noise {noise} Hz")]
    RateMismatch { speech: u32, noise: u32 },
    #[error("speech signal has zero power")]
    SilentSpeech,
    #[error("noise signal has zero power")]
    SilentNoise,
    #[error("target SNR must be finite, got {0}")]
    InvalidSnr(f64),
    #[error("mixture peak {peak:.4} exceeds full scale")]
    PeakExceeded { peak: f64 },
}

/// Mono audio with samples nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, NoiseError> {
        if sample_rate == 0 {
            return Err(NoiseError::InvalidSampleRate);
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(NoiseError::NonFiniteSample(i));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Mean squared amplitude; zero for an empty buffer.
    pub fn power(&self) -> f64 {
        mean_square(&self.samples)
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    }

    pub fn scaled(&self, gain: f64) -> AudioBuffer {
        AudioBuffer {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// What to do when the summed mixture leaves [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeakPolicy {
    /// Scale the whole mixture down so its peak is exactly 1.
    #[default]
    Rescale,
    /// Hard-limit individual samples.
    Clip,
    /// Refuse to produce the mixture.
    Error,
}

impl fmt::Display for PeakPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PeakPolicy::Rescale => "rescale",
            PeakPolicy::Clip => "clip",
            PeakPolicy::Error => "error",
        })
    }
}

impl FromStr for PeakPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rescale" => Ok(PeakPolicy::Rescale),
            "clip" => Ok(PeakPolicy::Clip),
            "error" => Ok(PeakPolicy::Error),
            other => Err(format!("unknown peak policy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixSpec {
    pub target_snr_db: f64,
    pub seed: u64,
    pub peak_policy: PeakPolicy,
}

impl MixSpec {
    pub fn new(target_snr_db: f64) -> Self {
        Self {
            target_snr_db,
            seed: 0,
            peak_policy: PeakPolicy::default(),
        }
    }
}

/// Result of [`mix_at_snr`].
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub audio: AudioBuffer,
    /// Gain applied to the (tiled) noise before summation.
    pub noise_scale: f64,
    /// Gain applied to the whole sum by the peak policy (1.0 when untouched).
    pub mixture_gain: f64,
    /// Whether any sample was hard-limited.
    pub clipped: bool,
}

fn mean_square(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64
}

/// Generates `n_samples` of pink (1/f power) noise by spectral shaping.
///
/// A complex Gaussian spectrum is drawn from a ChaCha8 stream seeded with
/// `seed`, bin `k` is weighted by `1/sqrt(f_k)` with the DC bin zeroed, and the
/// Hermitian-symmetric spectrum is inverse transformed. The result is scaled
/// so its peak is [`PINK_PEAK`].
pub fn generate_pink_noise(
    n_samples: usize,
    sample_rate: u32,
    seed: u64,
) -> Result<AudioBuffer, NoiseError> {
    if sample_rate == 0 {
        return Err(NoiseError::InvalidSampleRate);
    }
    let n = n_samples;
    if n == 0 {
        return AudioBuffer::new(Vec::new(), sample_rate);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spectrum = vec![Complex::new(0.0f64, 0.0); n];
    let bin_hz = sample_rate as f64 / n as f64;
    for k in 1..=n / 2 {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let weight = 1.0 / (k as f64 * bin_hz).sqrt();
        if 2 * k == n {
            // Nyquist bin of an even-length signal must be real.
            spectrum[k] = Complex::new(re * weight, 0.0);
        } else {
            let c = Complex::new(re * weight, im * weight);
            spectrum[k] = c;
            spectrum[n - k] = c.conj();
        }
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spectrum);
    let mut samples: Vec<f64> = spectrum.iter().map(|c| c.re).collect();
    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        let gain = PINK_PEAK / peak;
        samples.iter_mut().for_each(|s| *s *= gain);
    }
    AudioBuffer::new(samples, sample_rate)
}

/// `10 log10(P_speech / P_noise)` with whole-buffer mean-square power.
pub fn measure_snr(speech: &AudioBuffer, noise: &AudioBuffer) -> Result<f64, NoiseError> {
    if speech.sample_rate != noise.sample_rate {
        return Err(NoiseError::RateMismatch {
            speech: speech.sample_rate,
            noise: noise.sample_rate,
        });
    }
    let ps = speech.power();
    if ps == 0.0 {
        return Err(NoiseError::SilentSpeech);
    }
    let pn = noise.power();
    if pn == 0.0 {
        return Err(NoiseError::SilentNoise);
    }
    Ok(10.0 * (ps / pn).log10())
}

/// Tiles (wraps) or truncates `noise` to exactly `len` samples.
pub fn fit_noise(noise: &AudioBuffer, len: usize) -> AudioBuffer {
    let samples = if noise.is_empty() {
        vec![0.0; len]
    } else {
        noise.samples.iter().copied().cycle().take(len).collect()
    };
    AudioBuffer {
        samples,
        sample_rate: noise.sample_rate,
    }
}

/// Noise gain that puts `noise` at `target_snr_db` below `speech`.
pub fn noise_scale_for(
    speech: &AudioBuffer,
    noise: &AudioBuffer,
    target_snr_db: f64,
) -> Result<f64, NoiseError> {
    if !target_snr_db.is_finite() {
        return Err(NoiseError::InvalidSnr(target_snr_db));
    }
    let snr = measure_snr(speech, noise)?;
    Ok(10f64.powf((snr - target_snr_db) / 20.0))
}

/// Mixes `noise` into `speech` at the requested SNR.
///
/// The noise is fitted to the speech length, scaled so that
/// `measure_snr(speech, scaled_noise)` equals the target, added, and the
/// peak policy is applied to the sum.
pub fn mix_at_snr(
    speech: &AudioBuffer,
    noise: &AudioBuffer,
    spec: &MixSpec,
) -> Result<Mixture, NoiseError> {
    if speech.sample_rate != noise.sample_rate {
        return Err(NoiseError::RateMismatch {
            speech: speech.sample_rate,
            noise: noise.sample_rate,
        });
    }
    if speech.power() == 0.0 {
        return Err(NoiseError::SilentSpeech);
    }
    let fitted = fit_noise(noise, speech.len());
    let noise_scale = noise_scale_for(speech, &fitted, spec.target_snr_db)?;
    let mut mixed: Vec<f64> = speech
        .samples
        .iter()
        .zip(&fitted.samples)
        .map(|(s, n)| s + noise_scale * n)
        .collect();
    let peak = mixed.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let mut mixture_gain = 1.0;
    let mut clipped = false;
    if peak > 1.0 {
        match spec.peak_policy {
            PeakPolicy::Rescale => {
                mixture_gain = 1.0 / peak;
                mixed.iter_mut().for_each(|s| *s *= mixture_gain);
            }
            PeakPolicy::Clip => {
                clipped = true;
                mixed.iter_mut().for_each(|s| *s = s.clamp(-1.0, 1.0));
            }
            PeakPolicy::Error => return Err(NoiseError::PeakExceeded { peak }),
        }
    }
    Ok(Mixture {
        audio: AudioBuffer {
            samples: mixed,
            sample_rate: speech.sample_rate,
        },
        noise_scale,
        mixture_gain,
        clipped,
    })
}
