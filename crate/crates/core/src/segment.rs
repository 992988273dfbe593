//! Recording → tap table.
//!
//! Peaks are picked on a fixed grid of non-overlapping windows anchored at
//! the first sample, one candidate per window. Windows whose loudest sample
//! is below 1% of the recording's global peak are treated as silence. The
//! surviving peaks are filtered against a band around the median peak
//! amplitude, and the `tap_length_n` samples starting at each peak form one
//! row of the table.

use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::table::{TapTable, Waveform};
use crate::{Error, Result};

/// Fraction of the global peak below which a window counts as silent.
pub const SILENCE_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SegmentationConfig {
    /// Seconds.
    pub peak_window: f64,
    pub tap_length_n: usize,
    pub low_factor: f64,
    pub high_factor: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self { peak_window: 0.5, tap_length_n: 100, low_factor: 0.3, high_factor: 3.0 }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.peak_window > 0.0 && self.peak_window.is_finite()) {
            return Err(Error::InvalidConfig("peak_window must be positive".into()));
        }
        if self.tap_length_n == 0 {
            return Err(Error::InvalidConfig("tap_length_n must be at least 1".into()));
        }
        if !(self.low_factor > 0.0 && self.low_factor < 1.0 && self.high_factor > 1.0 && self.high_factor.is_finite()) {
            return Err(Error::InvalidConfig("need 0 < low_factor < 1 < high_factor".into()));
        }
        Ok(())
    }

    fn window_samples(&self, sample_rate: f64) -> usize {
        (libm::round(self.peak_window * sample_rate) as usize).max(1)
    }
}

/// Index of the loudest sample in each window, skipping silent windows.
pub fn detect_peaks(w: &Waveform, cfg: &SegmentationConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    let window = cfg.window_samples(w.sample_rate);
    if w.len() <= window {
        return Err(Error::SignalTooShort { available: w.len(), needed: window + 1 });
    }
    let global = w.samples.iter().fold(0.0_f64, |m, s| m.max(libm::fabs(*s)));
    if global == 0.0 {
        return Ok(Vec::new());
    }
    let floor = SILENCE_FLOOR * global;
    let mut peaks = Vec::new();
    for (k, chunk) in w.samples.chunks(window).enumerate() {
        let (best, amp) = chunk
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, ba), (i, s)| {
                let a = libm::fabs(*s);
                if a > ba { (i, a) } else { (bi, ba) }
            });
        if amp >= floor {
            peaks.push(k * window + best);
        }
    }
    Ok(peaks)
}

/// Keeps peaks whose absolute amplitude lies within
/// `[low_factor · median, high_factor · median]`, preserving order.
pub fn reject_outlier_peaks(w: &Waveform, peaks: &[usize], cfg: &SegmentationConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    if peaks.is_empty() {
        return Ok(Vec::new());
    }
    let amp = |p: usize| libm::fabs(w.samples[p]);
    let mut amps: Vec<f64> = peaks.iter().map(|&p| amp(p)).collect();
    amps.sort_by(f64::total_cmp);
    let mid = amps.len() / 2;
    let median = if amps.len() % 2 == 1 { amps[mid] } else { 0.5 * (amps[mid - 1] + amps[mid]) };
    let (lo, hi) = (cfg.low_factor * median, cfg.high_factor * median);
    Ok(peaks.iter().copied().filter(|&p| (lo..=hi).contains(&amp(p))).collect())
}

/// Cuts `tap_length_n` samples starting at each peak (the peak itself is the
/// first sample). Peaks without enough tail are dropped.
pub fn extract_taps(w: &Waveform, peaks: &[usize], cfg: &SegmentationConfig) -> Result<TapTable> {
    cfg.validate()?;
    let n = cfg.tap_length_n;
    let rows: Vec<&[f64]> = peaks
        .iter()
        .filter(|&&p| p + n <= w.len())
        .map(|&p| &w.samples[p..p + n])
        .collect();
    if rows.is_empty() {
        return Err(Error::NoValidTaps);
    }
    TapTable::from_matrix(Matrix::from_rows(&rows)?, None)
}

/// Peak detection, outlier rejection and extraction in one call.
pub fn segment(w: &Waveform, cfg: &SegmentationConfig) -> Result<TapTable> {
    let peaks = detect_peaks(w, cfg)?;
    let kept = reject_outlier_peaks(w, &peaks, cfg)?;
    extract_taps(w, &kept, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const RATE: f64 = 44_100.0;

    fn wave(samples: Vec<f64>) -> Waveform {
        Waveform::new(samples, RATE).unwrap()
    }

    #[test]
    fn silent_recording_has_no_peaks() {
        let w = wave(vec![0.0; 44_100]);
        assert!(detect_peaks(&w, &SegmentationConfig::default()).unwrap().is_empty());
        assert_eq!(segment(&w, &SegmentationConfig::default()).unwrap_err(), Error::NoValidTaps);
    }

    #[test]
    fn single_impulse() {
        let mut s = vec![0.0; 44_100];
        s[7000] = 1.0;
        assert_eq!(detect_peaks(&wave(s), &SegmentationConfig::default()).unwrap(), vec![7000]);
    }

    #[test]
    fn negative_polarity_counts() {
        let mut s = vec![0.0; 44_100];
        s[30_000] = -0.8;
        assert_eq!(detect_peaks(&wave(s), &SegmentationConfig::default()).unwrap(), vec![30_000]);
    }

    #[test]
    fn impulse_train_every_0_6_s_over_40_s() {
        let len = 40 * 44_100;
        let mut s = vec![0.0; len];
        let mut count = 0;
        let mut windows = Vec::new();
        for k in 0.. {
            let idx = libm::round(k as f64 * 0.6 * RATE) as usize;
            if idx >= len {
                break;
            }
            s[idx] = 1.0;
            windows.push(idx / 22_050);
            count += 1;
        }
        windows.dedup();
        // Every impulse lands in its own window because 0.6 s > 0.5 s.
        assert_eq!(windows.len(), count);
        let peaks = detect_peaks(&wave(s), &SegmentationConfig::default()).unwrap();
        assert_eq!(peaks.len(), count);
        assert!((66..=67).contains(&peaks.len()));
    }

    #[test]
    fn short_recording_is_rejected() {
        let w = wave(vec![1.0; 100]);
        assert!(matches!(detect_peaks(&w, &SegmentationConfig::default()), Err(Error::SignalTooShort { .. })));
    }

    fn band(low: f64, high: f64) -> SegmentationConfig {
        SegmentationConfig { low_factor: low, high_factor: high, ..SegmentationConfig::default() }
    }

    fn with_amplitudes(amps: &[f64]) -> (Waveform, Vec<usize>) {
        let s: Vec<f64> = amps.to_vec();
        (wave(s), (0..amps.len()).collect())
    }

    #[test]
    fn equal_peaks_all_kept() {
        let (w, p) = with_amplitudes(&[0.7; 6]);
        assert_eq!(reject_outlier_peaks(&w, &p, &SegmentationConfig::default()).unwrap(), p);
    }

    #[test]
    fn loud_outlier_rejected() {
        let (w, p) = with_amplitudes(&[1.0, 1.0, 1.0, 1.0, 10.0]);
        assert_eq!(reject_outlier_peaks(&w, &p, &band(0.5, 2.0)).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn quiet_outlier_rejected() {
        let (w, p) = with_amplitudes(&[0.1, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(reject_outlier_peaks(&w, &p, &band(0.5, 2.0)).unwrap(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn invalid_band_rejected() {
        let (w, p) = with_amplitudes(&[1.0]);
        assert!(reject_outlier_peaks(&w, &p, &band(1.5, 2.0)).is_err());
        assert!(reject_outlier_peaks(&w, &p, &band(0.5, 0.9)).is_err());
    }

    #[test]
    fn extract_whole_waveform() {
        let s: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let t = extract_taps(&wave(s.clone()), &[0], &SegmentationConfig::default()).unwrap();
        assert_eq!((t.m(), t.n()), (1, 100));
        assert_eq!(t.row(0), s.as_slice());
    }

    #[test]
    fn peak_without_tail_dropped() {
        let s = vec![0.5; 1000];
        let t = extract_taps(&wave(s.clone()), &[10, 950], &SegmentationConfig::default()).unwrap();
        assert_eq!(t.m(), 1);
        assert_eq!(extract_taps(&wave(s), &[950], &SegmentationConfig::default()).unwrap_err(), Error::NoValidTaps);
    }

    #[test]
    fn repeated_template_gives_identical_rows() {
        let template: Vec<f64> = (0..200).map(|i| libm::exp(-(i as f64) / 20.0) * libm::cos(i as f64 * 0.3)).collect();
        let s: Vec<f64> = core::iter::repeat(template.iter().copied()).take(70).flatten().collect();
        let peaks: Vec<usize> = (0..70).map(|k| k * 200).collect();
        let t = extract_taps(&wave(s), &peaks, &SegmentationConfig::default()).unwrap();
        assert_eq!(t.m(), 70);
        assert!(t.rows().all(|r| r == &template[..100]));
    }

    #[test]
    fn single_clean_tap_segments_to_one_row() {
        let mut s = vec![0.0; 44_100];
        for i in 0..400 {
            s[10_000 + i] = libm::exp(-(i as f64) / 40.0) * libm::cos(i as f64 * 0.5);
        }
        let t = segment(&wave(s), &SegmentationConfig::default()).unwrap();
        assert_eq!(t.m(), 1);
        assert_eq!(t.row(0)[0], 1.0);
    }
}
