//! Surrogate tap signals: a step plus a sinusoid plus Gaussian noise.

use alloc::string::String;
use alloc::vec::Vec;

use rand_distr::{Distribution, Normal};

use crate::seed::{rng_for, Key};
use crate::table::{TapTable, Waveform};
use crate::{Error, Result};

/// Parameters of one signal class.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassParams {
    /// Sinusoid amplitude, in the same linear units as the step.
    pub amplitude: f64,
    /// rad/s.
    pub angular_frequency: f64,
    pub step_initial: f64,
    /// Seconds.
    pub step_time: f64,
    pub label: String,
}

impl ClassParams {
    pub fn new(label: impl Into<String>, amplitude: f64, angular_frequency: f64) -> Self {
        Self { amplitude, angular_frequency, step_initial: 1.0, step_time: 0.15, label: label.into() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!("{}: amplitude must be positive", self.label)));
        }
        if !(self.angular_frequency > 0.0 && self.angular_frequency.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!(
                "{}: angular frequency must be positive",
                self.label
            )));
        }
        if !(self.step_time >= 0.0) || !self.step_initial.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!("{}: invalid step", self.label)));
        }
        Ok(())
    }

    /// Noiseless value at time `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        let step = if t >= self.step_time { self.step_initial } else { 0.0 };
        step + self.amplitude * libm::sin(self.angular_frequency * t)
    }
}

/// The five simulated signal classes: (amplitude, rad/s) pairs
/// (1.0, 20), (0.7, 25), (0.4, 15), (0.8, 18) and (1.5, 13), each on a unit
/// step at 0.15 s. Labels are `class1` to `class5`.
pub fn default_classes() -> Vec<ClassParams> {
    [(1.0, 20.0), (0.7, 25.0), (0.4, 15.0), (0.8, 18.0), (1.5, 13.0)]
        .iter()
        .enumerate()
        .map(|(i, &(a, w))| ClassParams::new(alloc::format!("class{}", i + 1), a, w))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SynthConfig {
    /// Hz.
    pub sample_rate: f64,
    /// Seconds.
    pub duration: f64,
    /// Standard deviation of the zero-mean Gaussian noise.
    pub noise_std: f64,
    pub sub_signals_per_class: usize,
    /// Derived from the run seed, never read from config files.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub rng_seed: u64,
    /// Variables kept per sub-signal (the leading `n` samples).
    pub n: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { sample_rate: 100.0, duration: 1.0, noise_std: 0.1, sub_signals_per_class: 30, rng_seed: 0, n: 100 }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::InvalidConfig("sample_rate must be positive".into()));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidConfig("duration must be positive".into()));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidConfig("noise_std must be non-negative".into()));
        }
        if self.sub_signals_per_class == 0 {
            return Err(Error::InvalidConfig("sub_signals_per_class must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        libm::round(self.duration * self.sample_rate) as usize
    }
}

/// One noisy sub-signal. Sample `i` is taken at `t = i / sample_rate`.
pub fn synth_signal(params: &ClassParams, config: &SynthConfig, instance_index: usize) -> Result<Waveform> {
    config.validate()?;
    params.validate()?;
    if instance_index >= config.sub_signals_per_class {
        return Err(Error::InvalidConfig(alloc::format!(
            "instance index {instance_index} out of range for {} sub-signals",
            config.sub_signals_per_class
        )));
    }
    let len = config.sample_count();
    let mut samples: Vec<f64> =
        (0..len).map(|i| params.value_at(i as f64 / config.sample_rate)).collect();
    if config.noise_std > 0.0 {
        let mut rng = rng_for(
            config.rng_seed,
            &[Key::Str("synth"), Key::Str(&params.label), Key::Int(instance_index as u64)],
        );
        let normal = Normal::new(0.0, config.noise_std).expect("validated noise_std");
        for s in &mut samples {
            *s += normal.sample(&mut rng);
        }
    }
    Waveform::new(samples, config.sample_rate)
}

/// `sub_signals_per_class` rows per class, grouped by class in input order,
/// each truncated to the leading `config.n` samples and labeled.
pub fn synth_dataset(classes: &[ClassParams], config: &SynthConfig) -> Result<TapTable> {
    config.validate()?;
    if classes.is_empty() {
        return Err(Error::InvalidConfig("at least one class is required".into()));
    }
    for (i, c) in classes.iter().enumerate() {
        if classes[..i].iter().any(|o| o.label == c.label) {
            return Err(Error::InvalidConfig(alloc::format!("duplicate class label {:?}", c.label)));
        }
    }
    let available = config.sample_count();
    if available < config.n {
        return Err(Error::SignalTooShort { available, needed: config.n });
    }

    let m = classes.len() * config.sub_signals_per_class;
    let mut data = Vec::with_capacity(m * config.n);
    let mut labels = Vec::with_capacity(m);
    for class in classes {
        for idx in 0..config.sub_signals_per_class {
            let w = synth_signal(class, config, idx)?;
            data.extend_from_slice(&w.samples[..config.n]);
            labels.push(class.label.clone());
        }
    }
    TapTable::from_matrix(crate::Matrix::from_row_major(m, config.n, data)?, Some(labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> SynthConfig {
        SynthConfig { noise_std: 0.0, ..SynthConfig::default() }
    }

    #[test]
    fn default_classes_match_simulation_study() {
        let c = default_classes();
        assert_eq!(c.len(), 5);
        assert_eq!((c[0].amplitude, c[0].angular_frequency), (1.0, 20.0));
        assert_eq!((c[1].amplitude, c[1].angular_frequency), (0.7, 25.0));
        assert_eq!((c[2].amplitude, c[2].angular_frequency), (0.4, 15.0));
        assert_eq!((c[3].amplitude, c[3].angular_frequency), (0.8, 18.0));
        assert_eq!((c[4].amplitude, c[4].angular_frequency), (1.5, 13.0));
        assert!(c.iter().all(|p| p.step_time == 0.15 && p.step_initial == 1.0));
    }

    #[test]
    fn noiseless_samples_follow_formula() {
        let class1 = &default_classes()[0];
        let w = synth_signal(class1, &quiet(), 0).unwrap();
        assert_eq!(w.len(), 100);
        assert_eq!(w.samples[0], 0.0);
        // 15 / 100 Hz is exactly the step time.
        assert_eq!(w.samples[15], 1.0 + 1.0 * libm::sin(20.0 * 0.15));
        assert_eq!(w.samples[14], libm::sin(20.0 * 0.14));
    }

    #[test]
    fn rejects_bad_config() {
        let class1 = &default_classes()[0];
        let cfg = SynthConfig { duration: 0.0, ..SynthConfig::default() };
        assert!(matches!(synth_signal(class1, &cfg, 0), Err(Error::InvalidConfig(_))));
        let cfg = SynthConfig { sample_rate: -1.0, ..SynthConfig::default() };
        assert!(matches!(synth_signal(class1, &cfg, 0), Err(Error::InvalidConfig(_))));
        assert!(synth_signal(class1, &SynthConfig::default(), 30).is_err());
    }

    #[test]
    fn dataset_needs_enough_samples() {
        let cfg = SynthConfig { duration: 0.5, ..SynthConfig::default() };
        assert_eq!(
            synth_dataset(&default_classes(), &cfg).unwrap_err(),
            Error::SignalTooShort { available: 50, needed: 100 }
        );
    }

    #[test]
    fn duplicate_labels_rejected() {
        let c = [ClassParams::new("a", 1.0, 2.0), ClassParams::new("a", 2.0, 3.0)];
        assert!(synth_dataset(&c, &SynthConfig::default()).is_err());
    }

    #[test]
    fn default_dataset_shape() {
        let t = synth_dataset(&default_classes(), &SynthConfig::default()).unwrap();
        assert_eq!((t.m(), t.n()), (150, 100));
        assert_eq!(t.label(0), Some("class1"));
        assert_eq!(t.label(149), Some("class5"));
    }

    #[test]
    fn single_noiseless_row_equals_formula() {
        let c = [ClassParams::new("x", 0.4, 15.0)];
        let cfg = SynthConfig { sub_signals_per_class: 1, ..quiet() };
        let t = synth_dataset(&c, &cfg).unwrap();
        assert_eq!(t.m(), 1);
        for (i, v) in t.row(0).iter().enumerate() {
            assert_eq!(*v, c[0].value_at(i as f64 / 100.0));
        }
    }

    #[test]
    fn noiseless_instances_are_identical() {
        let t = synth_dataset(&default_classes()[..1], &SynthConfig { sub_signals_per_class: 4, ..quiet() }).unwrap();
        assert!(t.rows().all(|r| r == t.row(0)));
    }

    #[test]
    fn noise_is_zero_mean() {
        let p = ClassParams::new("noise", 1e-9, 1.0);
        let cfg = SynthConfig { sample_rate: 1000.0, duration: 200.0, noise_std: 0.1, ..SynthConfig::default() };
        let w = synth_signal(&p, &cfg, 0).unwrap();
        let clean: f64 = (0..w.len()).map(|i| p.value_at(i as f64 / 1000.0)).sum();
        let n = w.len() as f64;
        let mean = (w.samples.iter().sum::<f64>() - clean) / n;
        assert!(n >= 1e5);
        assert!(mean.abs() < 3.0 * 0.1 / libm::sqrt(n), "noise mean {mean}");
    }
}
