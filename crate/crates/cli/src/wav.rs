//! WAV ingestion and emission. The pipeline standardizes on 16 kHz 16-bit
//! PCM; stereo input is downmixed to mono by rounding the channel mean.

use std::path::{Path, PathBuf};

use thiserror::Error;
use vqbic_core::audio::AudioBuffer;

pub const REQUIRED_SAMPLE_RATE: u32 = 16_000;

#[derive(Debug, Error)]
pub enum WavError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: not a RIFF/WAV file")]
    NotWav { path: PathBuf },
    #[error("{path}: unsupported encoding: {detail} (need 16-bit PCM, mono or stereo)")]
    UnsupportedEncoding { path: PathBuf, detail: String },
    #[error("{path}: sample rate {got} Hz, this pipeline requires {REQUIRED_SAMPLE_RATE} Hz")]
    BadSampleRate { path: PathBuf, got: u32 },
}

pub fn read_wav(path: &Path) -> Result<AudioBuffer, WavError> {
    let mut reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(source) => WavError::Io { path: path.into(), source },
        hound::Error::FormatError(_) => WavError::NotWav { path: path.into() },
        other => WavError::UnsupportedEncoding { path: path.into(), detail: other.to_string() },
    })?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(WavError::UnsupportedEncoding {
            path: path.into(),
            detail: format!("{}-bit {:?}", spec.bits_per_sample, spec.sample_format),
        });
    }
    if spec.sample_rate != REQUIRED_SAMPLE_RATE {
        return Err(WavError::BadSampleRate { path: path.into(), got: spec.sample_rate });
    }
    let interleaved = reader
        .samples::<i16>()
        .collect::<Result<Vec<i16>, _>>()
        .map_err(|_| WavError::NotWav { path: path.into() })?;
    let samples = match spec.channels {
        1 => interleaved,
        2 => interleaved
            .chunks_exact(2)
            .map(|p| {
                // Mean of the two channels, rounded half away from zero.
                (((p[0] as i32 + p[1] as i32) as f64) / 2.0).round() as i16
            })
            .collect(),
        n => {
            return Err(WavError::UnsupportedEncoding {
                path: path.into(),
                detail: format!("{n} channels"),
            })
        }
    };
    Ok(AudioBuffer::new(samples, spec.sample_rate))
}

pub fn write_wav(path: &Path, buf: &AudioBuffer) -> Result<(), WavError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: buf.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let map_err = |e: hound::Error| match e {
        hound::Error::IoError(source) => WavError::Io { path: path.into(), source },
        other => WavError::UnsupportedEncoding { path: path.into(), detail: other.to_string() },
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(map_err)?;
    for &s in &buf.samples {
        writer.write_sample(s).map_err(map_err)?;
    }
    writer.finalize().map_err(map_err)
}
