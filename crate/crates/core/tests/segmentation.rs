use proptest::prelude::*;
use taptest_core::{
    default_classes, detect_peaks, reject_outlier_peaks, segment, synth_dataset, SegmentationConfig, SynthConfig,
    Waveform,
};

const RATE: f64 = 44_100.0;

/// Decaying 2 kHz ring, ~5 ms time constant.
fn tap_template(gain: f64) -> Vec<f64> {
    (0..2_000)
        .map(|i| {
            let t = i as f64 / RATE;
            gain * (-t / 0.005).exp() * (2.0 * std::f64::consts::PI * 2_000.0 * t + 0.3).cos()
        })
        .collect()
}

fn session(gains: &[f64], spacing: f64) -> Waveform {
    let len = ((gains.len() as f64 * spacing + 1.0) * RATE) as usize;
    let mut s = vec![0.0; len];
    for (k, &g) in gains.iter().enumerate() {
        let start = (k as f64 * spacing * RATE).round() as usize;
        for (i, v) in tap_template(g).into_iter().enumerate() {
            s[start + i] += v;
        }
    }
    Waveform::new(s, RATE).unwrap()
}

#[test]
fn seventy_two_equal_taps() {
    let w = session(&[1.0; 72], 0.55);
    let t = segment(&w, &SegmentationConfig::default()).unwrap();
    assert_eq!((t.m(), t.n()), (72, 100));
    assert!(t.rows().all(|r| r == t.row(0)));
}

#[test]
fn abnormal_hits_are_removed() {
    let mut gains = vec![1.0; 74];
    gains[10] = 2.0;
    gains[40] = 0.1;
    let cfg = SegmentationConfig { low_factor: 0.5, high_factor: 1.5, ..SegmentationConfig::default() };
    let w = session(&gains, 0.55);
    assert_eq!(detect_peaks(&w, &cfg).unwrap().len(), 74);
    assert_eq!(segment(&w, &cfg).unwrap().m(), 72);
}

#[test]
fn synthetic_dataset_rows_match_class_order() {
    let mut classes = default_classes();
    let cfg = SynthConfig { sub_signals_per_class: 3, rng_seed: 11, ..SynthConfig::default() };
    let a = synth_dataset(&classes, &cfg).unwrap();
    classes.reverse();
    let b = synth_dataset(&classes, &cfg).unwrap();
    // Noise streams are keyed by label, so reordering only permutes rows.
    for i in 0..a.m() {
        let j = (4 - i / 3) * 3 + i % 3;
        assert_eq!(a.row(i), b.row(j));
        assert_eq!(a.label(i), b.label(j));
    }
    assert_eq!(a, synth_dataset(&default_classes(), &cfg).unwrap());
}

fn arb_waveform() -> impl Strategy<Value = Waveform> {
    prop::collection::vec(-1.0f64..1.0, 2_000..6_000).prop_map(|s| Waveform::new(s, 1_000.0).unwrap())
}

proptest! {
    #[test]
    fn peaks_increase_one_per_window(w in arb_waveform()) {
        let cfg = SegmentationConfig { peak_window: 0.25, tap_length_n: 20, ..SegmentationConfig::default() };
        let peaks = detect_peaks(&w, &cfg).unwrap();
        prop_assert!(peaks.windows(2).all(|p| p[0] < p[1]));
        let mut windows: Vec<usize> = peaks.iter().map(|p| p / 250).collect();
        windows.dedup();
        prop_assert_eq!(windows.len(), peaks.len());

        let kept = reject_outlier_peaks(&w, &peaks, &cfg).unwrap();
        let mut it = peaks.iter();
        prop_assert!(kept.iter().all(|k| it.any(|p| p == k)));
    }

    #[test]
    fn positive_scaling_changes_nothing(w in arb_waveform(), scale in 0.01f64..100.0) {
        let cfg = SegmentationConfig { peak_window: 0.25, tap_length_n: 20, ..SegmentationConfig::default() };
        let scaled = Waveform::new(w.samples.iter().map(|s| s * scale).collect(), w.sample_rate).unwrap();
        let p = detect_peaks(&w, &cfg).unwrap();
        let ps = detect_peaks(&scaled, &cfg).unwrap();
        prop_assert_eq!(&p, &ps);
        prop_assert_eq!(reject_outlier_peaks(&w, &p, &cfg).unwrap(), reject_outlier_peaks(&scaled, &ps, &cfg).unwrap());
    }

    #[test]
    fn rows_have_configured_length(w in arb_waveform(), n in 1usize..200) {
        let cfg = SegmentationConfig { peak_window: 0.25, tap_length_n: n, ..SegmentationConfig::default() };
        if let Ok(t) = segment(&w, &cfg) {
            prop_assert_eq!(t.n(), n);
            prop_assert_eq!(&t, &segment(&w, &cfg).unwrap());
        }
    }
}
