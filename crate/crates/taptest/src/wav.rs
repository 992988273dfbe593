//! WAV ingestion and export.
//!
//! Reads RIFF WAV with 16-bit integer PCM or 32-bit float samples. Integer
//! samples are scaled by 1/32768; multi-channel files are averaged to mono.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use taptest_core::Waveform;

use crate::error::{Error, Result};

/// Longest recording accepted, in seconds.
pub const MAX_DURATION_SECS: u32 = 600;

pub fn read_wav(path: &Path) -> Result<Waveform> {
    // Opening is the I/O step; everything hound reports afterwards is about
    // the file's content (it signals truncation as generic I/O errors).
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = hound::WavReader::new(std::io::BufReader::new(file)).map_err(|e| content_error(path, e))?;
    let spec = reader.spec();
    let channels = usize::from(spec.channels);
    if reader.duration() > MAX_DURATION_SECS.saturating_mul(spec.sample_rate) {
        return Err(Error::format(path, format!("recording longer than {MAX_DURATION_SECS} s")));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / 32768.0))
            .collect::<std::result::Result<_, _>>(),
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>(),
        (format, bits) => {
            return Err(Error::format(path, format!("unsupported encoding: {bits}-bit {format:?}")));
        }
    }
    .map_err(|e| content_error(path, e))?;
    if interleaved.is_empty() {
        return Err(Error::format(path, "recording has no samples"));
    }
    Ok(Waveform::from_interleaved(&interleaved, channels, f64::from(spec.sample_rate))?)
}

fn content_error(path: &Path, e: hound::Error) -> Error {
    Error::format(path, format!("invalid WAV: {e}"))
}

fn wav_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) if io.kind() != std::io::ErrorKind::UnexpectedEof => Error::io(path, io),
        other => Error::format(path, format!("invalid WAV: {other}")),
    }
}

/// Scale metadata written next to an exported WAV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavSidecar {
    /// Multiply decoded samples (in [-1, 1]) by this to recover the original
    /// amplitudes.
    pub scale: f64,
    pub sample_rate: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

pub fn sidecar_path(wav: &Path) -> PathBuf {
    let mut s = wav.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes 16-bit mono PCM rescaled so the loudest sample hits full scale,
/// plus a `<file>.json` sidecar recording the scale factor.
pub fn write_wav(path: &Path, w: &Waveform, label: Option<&str>) -> Result<WavSidecar> {
    let rate = w.sample_rate.round();
    if rate < 1.0 || rate > f64::from(u32::MAX) || (rate - w.sample_rate).abs() > 1e-9 {
        return Err(Error::Usage(format!("WAV needs an integral sample rate, got {}", w.sample_rate)));
    }
    let peak = w.samples.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
    let scale = if peak > 0.0 { peak } else { 1.0 };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: rate as u32,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    for s in &w.samples {
        writer
            .write_sample((s / scale * 32767.0).round() as i16)
            .map_err(|e| wav_error(path, e))?;
    }
    writer.finalize().map_err(|e| wav_error(path, e))?;

    let sidecar = WavSidecar { scale: scale * 32768.0 / 32767.0, sample_rate: spec.sample_rate, label: label.map(str::to_owned) };
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    fs::write(&side, json + "\n").map_err(|e| Error::io(&side, e))?;
    Ok(sidecar)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_raw(path: &Path, spec: hound::WavSpec, frames: &[i16]) {
        let mut w = hound::WavWriter::create(path, spec).unwrap();
        for &s in frames {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
    }

    fn pcm16(channels: u16) -> hound::WavSpec {
        hound::WavSpec { channels, sample_rate: 44_100, bits_per_sample: 16, sample_format: hound::SampleFormat::Int }
    }

    #[test]
    fn silence_reads_as_zeros() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("silence.wav");
        write_raw(&p, pcm16(1), &vec![0; 44_100]);
        let w = read_wav(&p).unwrap();
        assert_eq!(w.len(), 44_100);
        assert_eq!(w.sample_rate, 44_100.0);
        assert!(w.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn full_scale_square_wave() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("square.wav");
        write_raw(&p, pcm16(1), &[i16::MAX; 100]);
        let w = read_wav(&p).unwrap();
        assert!(w.samples.iter().all(|&s| s == 32767.0 / 32768.0));
    }

    #[test]
    fn opposite_stereo_channels_cancel() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("stereo.wav");
        let frames: Vec<i16> = (0..200).map(|i| if i % 2 == 0 { 16_384 } else { -16_384 }).collect();
        write_raw(&p, pcm16(2), &frames);
        let w = read_wav(&p).unwrap();
        assert_eq!(w.len(), 100);
        assert!(w.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn float_wav_is_read_verbatim() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("float.wav");
        let spec = hound::WavSpec { channels: 1, sample_rate: 8_000, bits_per_sample: 32, sample_format: hound::SampleFormat::Float };
        let mut w = hound::WavWriter::create(&p, spec).unwrap();
        for s in [0.25f32, -0.5, 1.0] {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
        assert_eq!(read_wav(&p).unwrap().samples, vec![0.25, -0.5, 1.0]);
    }

    #[test]
    fn unsupported_and_corrupt_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("eight.wav");
        let spec = hound::WavSpec { channels: 1, sample_rate: 8_000, bits_per_sample: 8, sample_format: hound::SampleFormat::Int };
        let mut w = hound::WavWriter::create(&p, spec).unwrap();
        w.write_sample(3i8).unwrap();
        w.finalize().unwrap();
        assert!(matches!(read_wav(&p), Err(Error::Format { .. })));

        let bad = dir.path().join("bad.wav");
        fs::write(&bad, b"RIFF\x10\x00\x00\x00WAVEjunk").unwrap();
        let r = read_wav(&bad);
        assert!(matches!(r, Err(Error::Format { .. })), "{r:?}");

        assert!(matches!(read_wav(&dir.path().join("missing.wav")), Err(Error::Io { .. })));
    }

    #[test]
    fn export_round_trip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.wav");
        let samples: Vec<f64> = (0..100).map(|i| 2.5 * (i as f64 * 0.2).sin()).collect();
        let w = Waveform::new(samples.clone(), 100.0).unwrap();
        let side = write_wav(&p, &w, Some("class1")).unwrap();
        let back = read_wav(&p).unwrap();
        for (a, b) in samples.iter().zip(&back.samples) {
            assert!((a - b * side.scale).abs() < 2.5 / 32767.0);
        }
        let stored: WavSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(&p)).unwrap()).unwrap();
        assert_eq!(stored, side);
    }
}
