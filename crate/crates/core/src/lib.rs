//! Core algorithms for acoustic tap-testing classification.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`segment`] cuts a recording into fixed-length tap vectors, producing a
//!    [`TapTable`] with one row per tap.
//! 2. [`PcaModel::fit`] centers the table and computes its principal axes by
//!    singular value decomposition.
//! 3. [`kmeans_fit`] partitions the training scores in the first two
//!    principal components, and [`RegionModel`] maps each cluster to the
//!    specimen label it represents.
//! 4. [`RegionModel::classify`] labels held-out taps by nearest centroid and
//!    [`confusion`] tabulates the outcome.
//!
//! [`synth`] generates the step-plus-sinusoid surrogate signals used to
//! exercise the whole pipeline without recorded audio.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod kmeans;
pub mod linalg;
pub mod pca;
pub mod regions;
pub mod seed;
pub mod segment;
pub mod split;
pub mod synth;
mod table;

pub use error::{Error, Result};
pub use kmeans::{kmeans_fit, KMeansFit, KMeansOptions};
pub use linalg::Matrix;
pub use pca::{select_components, PcaModel};
pub use regions::{confusion, map_clusters_to_labels, project_unknown, ConfusionMatrix, Placement, RegionModel};
pub use segment::{detect_peaks, extract_taps, reject_outlier_peaks, segment, SegmentationConfig};
pub use split::{stratified_split, Split};
pub use synth::{default_classes, synth_dataset, synth_signal, ClassParams, SynthConfig};
pub use table::{ScoreTable, TapTable, Waveform};
