//! 16-bit PCM mono WAV reading and writing.

use std::path::Path;

use crate::noisemix::{AudioBuffer, NoiseError};
use crate::util::write_atomic_with;

#[derive(Debug, thiserror::Error)]
pub enum WavError {
    #[error("{path}: {source}")]
    Codec {
        path: String,
        #[source]
        source: hound::Error,
    },
    #[error("{path}: expected 16-bit PCM mono, found {channels} channel(s) at {bits} bits")]
    Unsupported {
        path: String,
        channels: u16,
        bits: u16,
    },
    #[error("{path}: {source}")]
    Audio {
        path: String,
        #[source]
        source: NoiseError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn read_wav(path: &Path) -> Result<AudioBuffer, WavError> {
    let display = path.display().to_string();
    let codec = |source| WavError::Codec {
        path: display.clone(),
        source,
    };
    let reader = hound::WavReader::open(path).map_err(codec)?;
    let spec = reader.spec();
    if spec.channels != 1
        || spec.bits_per_sample != 16
        || spec.sample_format != hound::SampleFormat::Int
    {
        return Err(WavError::Unsupported {
            path: display,
            channels: spec.channels,
            bits: spec.bits_per_sample,
        });
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32768.0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(codec)?;
    AudioBuffer::new(samples, spec.sample_rate).map_err(|source| WavError::Audio {
        path: display,
        source,
    })
}

fn quantize(sample: f64) -> i16 {
    (sample * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Writes `audio` as 16-bit PCM mono, via a temporary file and rename.
pub fn write_wav(path: &Path, audio: &AudioBuffer) -> Result<(), WavError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let display = path.display().to_string();
    write_atomic_with(path, |tmp| {
        let codec = |source| WavError::Codec {
            path: display.clone(),
            source,
        };
        let mut writer = hound::WavWriter::create(tmp, spec).map_err(codec)?;
        for &s in audio.samples() {
            writer.write_sample(quantize(s)).map_err(codec)?;
        }
        writer.finalize().map_err(codec)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noisemix::generate_pink_noise;

    #[test]
    fn wav_round_trip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("n.wav");
        let noise = generate_pink_noise(2000, 16000, 11).unwrap();
        write_wav(&path, &noise).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.sample_rate(), 16000);
        assert_eq!(back.len(), 2000);
        for (a, b) in noise.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() <= 0.5 / 32768.0 + 1e-12);
        }
    }

    #[test]
    fn stereo_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.wav");
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        w.write_sample(0i16).unwrap();
        w.write_sample(0i16).unwrap();
        w.finalize().unwrap();
        assert!(matches!(
            read_wav(&path),
            Err(WavError::Unsupported { channels: 2, .. })
        ));
    }

    #[test]
    fn full_scale_is_clamped() {
        assert_eq!(quantize(1.0), 32767);
        assert_eq!(quantize(-1.0), -32768);
        assert_eq!(quantize(0.0), 0);
    }
}
