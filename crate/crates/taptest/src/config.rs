//! Run configuration file (`--config run.json`). Every field is optional;
//! command-line flags override what the file sets.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use taptest_core::{ClassParams, KMeansOptions, SegmentationConfig, SynthConfig};

use crate::error::{Error, Result};
use crate::pipeline::Components;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub split_fraction: Option<f64>,
    pub synth: SynthConfig,
    /// Signal classes for `simulate`; the five defaults when absent.
    pub classes: Option<Vec<ClassParams>>,
    pub segmentation: SegmentationConfig,
    pub kmeans: KMeansOptions,
    pub k: Option<usize>,
    pub components: Option<usize>,
    pub variance_threshold: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::format(path, format!("config: {e}")))?;
        if cfg.components.is_some() && cfg.variance_threshold.is_some() {
            return Err(Error::format(path, "config: set components or variance_threshold, not both"));
        }
        Ok(cfg)
    }

    pub fn components(&self) -> Components {
        match (self.components, self.variance_threshold) {
            (_, Some(t)) => Components::Variance(t),
            (Some(c), None) => Components::Fixed(c),
            (None, None) => Components::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_keeps_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.json");
        fs::write(&p, r#"{"seed": 7, "synth": {"noise_std": 0.2}, "kmeans": {"restarts": 3}}"#).unwrap();
        let cfg = RunConfig::load(&p).unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.synth.noise_std, 0.2);
        assert_eq!(cfg.synth.sub_signals_per_class, 30);
        assert_eq!(cfg.kmeans.restarts, 3);
        assert_eq!(cfg.kmeans.max_iter, 300);
        assert_eq!(cfg.components(), Components::Fixed(2));
    }

    #[test]
    fn unknown_fields_and_conflicts_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.json");
        fs::write(&p, r#"{"sead": 7}"#).unwrap();
        assert!(matches!(RunConfig::load(&p), Err(Error::Format { .. })));
        fs::write(&p, r#"{"components": 2, "variance_threshold": 0.95}"#).unwrap();
        assert!(matches!(RunConfig::load(&p), Err(Error::Format { .. })));
    }
}
