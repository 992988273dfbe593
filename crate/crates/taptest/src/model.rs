//! The trained machine: PCA projection, trained regions, the segmentation
//! settings the training taps were cut with, and a description of the
//! training set. Stored as one JSON document:
//!
//! ```text
//! {
//!   "version": "1",
//!   "pca": { "n", "mean": [n], "singular_values": [r], "explained": [r],
//!            "projection": [[n] × n]   // column-major: projection[j] is axis j
//!   },
//!   "regions": { "k", "c", "centroids": [[c] × k], "cluster_to_label": { "0": label, ... } },
//!   "segmentation": { "peak_window", "tap_length_n", "low_factor", "high_factor" },
//!   "provenance": { "training_rows", "label_counts": { label: count }, "fingerprint": sha256-hex }
//! }
//! ```
//!
//! Loading re-checks every invariant of every part.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use taptest_core::{Error as CoreError, Matrix, PcaModel, RegionModel, SegmentationConfig, TapTable};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub training_rows: usize,
    pub label_counts: BTreeMap<String, usize>,
    /// SHA-256 over the training rows and labels.
    pub fingerprint: String,
}

impl Provenance {
    pub fn describe(table: &TapTable) -> Self {
        let mut label_counts = BTreeMap::new();
        for l in table.labels().into_iter().flatten() {
            *label_counts.entry(l.clone()).or_insert(0) += 1;
        }
        let mut h = Sha256::new();
        h.update((table.m() as u64).to_le_bytes());
        h.update((table.n() as u64).to_le_bytes());
        for v in table.matrix().as_slice() {
            h.update(v.to_bits().to_le_bytes());
        }
        for l in table.labels().into_iter().flatten() {
            h.update((l.len() as u64).to_le_bytes());
            h.update(l.as_bytes());
        }
        Self { training_rows: table.m(), label_counts, fingerprint: hex::encode(h.finalize()) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedMachine {
    pub pca: PcaModel,
    pub regions: RegionModel,
    pub segmentation: SegmentationConfig,
    pub provenance: Provenance,
}

impl TrainedMachine {
    pub fn validate(&self) -> std::result::Result<(), String> {
        self.pca.validate().map_err(|e| e.to_string())?;
        self.segmentation.validate().map_err(|e| e.to_string())?;
        if self.pca.n() != self.segmentation.tap_length_n {
            return Err(format!(
                "pca has {} variables but segmentation cuts {} samples per tap",
                self.pca.n(),
                self.segmentation.tap_length_n
            ));
        }
        if self.regions.c() > self.pca.n() {
            return Err(format!("regions use {} components, pca has {}", self.regions.c(), self.pca.n()));
        }
        let counted: usize = self.provenance.label_counts.values().sum();
        if counted != self.provenance.training_rows {
            return Err(format!(
                "provenance label counts sum to {counted}, training_rows is {}",
                self.provenance.training_rows
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = MachineDoc::from(self);
        serde_json::to_string_pretty(&doc).expect("model document serializes") + "\n"
    }

    /// Parse failures and schema mismatches come back as `Malformed`;
    /// well-formed documents describing an invalid machine as
    /// `InvariantViolation`.
    pub fn from_json(text: &str) -> std::result::Result<Self, CoreError> {
        let doc: MachineDoc = serde_json::from_str(text).map_err(|e| CoreError::Malformed(format!("parse error: {e}")))?;
        doc.into_machine()
    }
}

pub fn save(machine: &TrainedMachine, path: &Path) -> Result<()> {
    fs::write(path, machine.to_json()).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<TrainedMachine> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TrainedMachine::from_json(&text).map_err(|e| Error::format(path, e.to_string()))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineDoc {
    version: String,
    pca: PcaDoc,
    regions: RegionsDoc,
    segmentation: SegmentationConfig,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PcaDoc {
    n: usize,
    mean: Vec<f64>,
    singular_values: Vec<f64>,
    projection: Vec<Vec<f64>>,
    explained: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionsDoc {
    k: usize,
    c: usize,
    centroids: Vec<Vec<f64>>,
    cluster_to_label: BTreeMap<usize, String>,
}

impl From<&TrainedMachine> for MachineDoc {
    fn from(m: &TrainedMachine) -> Self {
        let u = m.pca.projection();
        MachineDoc {
            version: FORMAT_VERSION.to_string(),
            pca: PcaDoc {
                n: m.pca.n(),
                mean: m.pca.mean().to_vec(),
                singular_values: m.pca.singular_values().to_vec(),
                projection: (0..u.cols()).map(|j| u.column(j)).collect(),
                explained: m.pca.explained_variance().to_vec(),
            },
            regions: RegionsDoc {
                k: m.regions.k(),
                c: m.regions.c(),
                centroids: m.regions.centroids().row_iter().map(<[f64]>::to_vec).collect(),
                cluster_to_label: m.regions.labels().iter().cloned().enumerate().collect(),
            },
            segmentation: m.segmentation.clone(),
            provenance: m.provenance.clone(),
        }
    }
}

impl MachineDoc {
    fn into_machine(self) -> std::result::Result<TrainedMachine, CoreError> {
        let malformed = |m: String| Err(CoreError::Malformed(m));
        if self.version != FORMAT_VERSION {
            return malformed(format!("unsupported model version {:?}", self.version));
        }
        let p = self.pca;
        if p.mean.len() != p.n || p.projection.len() != p.n || p.projection.iter().any(|c| c.len() != p.n) {
            return malformed(format!("schema mismatch: pca.n = {} disagrees with mean/projection shapes", p.n));
        }
        let projection = Matrix::from_columns(&p.projection)?;
        let pca = PcaModel::from_parts(p.mean, projection, p.singular_values, p.explained)?;

        let r = self.regions;
        if r.centroids.len() != r.k || r.centroids.iter().any(|c| c.len() != r.c) {
            return malformed(format!("schema mismatch: regions k = {}, c = {} disagree with centroids", r.k, r.c));
        }
        if r.cluster_to_label.len() != r.k || r.cluster_to_label.keys().enumerate().any(|(i, &k)| i != k) {
            return malformed("cluster_to_label must name every cluster 0..k exactly once".into());
        }
        let centroids = Matrix::from_rows(&r.centroids)?;
        let regions = RegionModel::new(centroids, r.cluster_to_label.into_values().collect())?;

        let machine = TrainedMachine { pca, regions, segmentation: self.segmentation, provenance: self.provenance };
        machine.validate().map_err(CoreError::InvariantViolation)?;
        Ok(machine)
    }
}
