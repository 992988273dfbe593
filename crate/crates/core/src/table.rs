use alloc::string::String;
use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::{Error, Result};

/// A mono recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    /// Hz.
    pub sample_rate: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        Ok(Self { samples, sample_rate })
    }

    /// Downmixes interleaved multi-channel audio by averaging the channels
    /// of each frame.
    pub fn from_interleaved(interleaved: &[f64], channels: usize, sample_rate: f64) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidConfig("channel count must be at least 1".into()));
        }
        if interleaved.len() % channels != 0 {
            return Err(Error::Malformed(alloc::format!(
                "{} samples do not divide into {} channels",
                interleaved.len(),
                channels
            )));
        }
        let samples = interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f64>() / channels as f64)
            .collect();
        Self::new(samples, sample_rate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }
}

/// The observation matrix: one row per tap, one column per sample position.
#[derive(Debug, Clone, PartialEq)]
pub struct TapTable {
    data: Matrix,
    labels: Option<Vec<String>>,
}

impl TapTable {
    /// Empty table with `n` variables per row.
    pub fn new(n: usize) -> Self {
        Self { data: Matrix::zeros(0, n), labels: None }
    }

    pub fn from_matrix(data: Matrix, labels: Option<Vec<String>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != data.rows() {
                return Err(Error::DimensionMismatch { expected: data.rows(), found: l.len() });
            }
        }
        Ok(Self { data, labels })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], labels: Option<Vec<String>>) -> Result<Self> {
        Self::from_matrix(Matrix::from_rows(rows)?, labels)
    }

    /// Number of taps.
    pub fn m(&self) -> usize {
        self.data.rows()
    }

    /// Number of variables per tap.
    pub fn n(&self) -> usize {
        self.data.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.m() == 0
    }

    pub fn matrix(&self) -> &Matrix {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.data.row(i)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.row_iter()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.labels.as_ref().map(|l| l[i].as_str())
    }

    /// Distinct labels in sorted order.
    pub fn distinct_labels(&self) -> Vec<String> {
        let mut out: Vec<String> = self.labels.iter().flatten().cloned().collect();
        out.sort();
        out.dedup();
        out
    }

    /// Table restricted to the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> TapTable {
        let mut data = Vec::with_capacity(indices.len() * self.n());
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        let labels = self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i].clone()).collect());
        TapTable {
            data: Matrix::from_row_major(indices.len(), self.n(), data).expect("consistent shape"),
            labels,
        }
    }

    /// Appends the rows of `other`. Both tables must agree on `n` and on
    /// whether they carry labels; an empty table adopts the shape of `other`.
    pub fn append(&mut self, other: &TapTable) -> Result<()> {
        if self.m() == 0 {
            *self = other.clone();
            return Ok(());
        }
        if other.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: other.n() });
        }
        let labels = match (self.labels.take(), &other.labels) {
            (Some(mut a), Some(b)) => {
                a.extend(b.iter().cloned());
                Some(a)
            }
            (None, None) => None,
            _ => return Err(Error::Malformed("cannot mix labeled and unlabeled tables".into())),
        };
        let mut data = self.data.as_slice().to_vec();
        data.extend_from_slice(other.data.as_slice());
        self.data = Matrix::from_row_major(self.m() + other.m(), self.n(), data)?;
        self.labels = labels;
        Ok(())
    }
}

/// Observations expressed in principal-component coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    scores: Matrix,
    labels: Option<Vec<String>>,
}

impl ScoreTable {
    pub fn new(scores: Matrix, labels: Option<Vec<String>>) -> Result<Self> {
        if scores.cols() == 0 {
            return Err(Error::InvalidConfig("score table needs at least one component".into()));
        }
        if let Some(l) = &labels {
            if l.len() != scores.rows() {
                return Err(Error::DimensionMismatch { expected: scores.rows(), found: l.len() });
            }
        }
        Ok(Self { scores, labels })
    }

    pub fn component_count(&self) -> usize {
        self.scores.cols()
    }

    pub fn len(&self) -> usize {
        self.scores.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.rows() == 0
    }

    pub fn matrix(&self) -> &Matrix {
        &self.scores
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.scores.row(i)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }
}
