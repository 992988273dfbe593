//! Trained regions in score space and their evaluation.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::kmeans::nearest_centroid;
use crate::linalg::Matrix;
use crate::pca::PcaModel;
use crate::table::{ScoreTable, TapTable};
use crate::{Error, Result};

/// Largest cluster count the exhaustive label assignment accepts.
pub const MAX_MAPPED_CLUSTERS: usize = 8;

/// Cluster centroids with one specimen label per cluster. Each centroid's
/// nearest-neighbour cell is the region of its label.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionModel {
    centroids: Matrix,
    labels: Vec<String>,
}

impl RegionModel {
    pub fn new(centroids: Matrix, labels: Vec<String>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvariantViolation(m));
        let k = centroids.rows();
        if k == 0 || centroids.cols() == 0 {
            return bad("region model needs at least one centroid and one dimension".into());
        }
        if labels.len() != k {
            return bad(format!("{} labels for {k} clusters", labels.len()));
        }
        if !centroids.is_finite() {
            return bad("centroids must be finite".into());
        }
        for i in 0..k {
            for j in 0..i {
                if centroids.row(i) == centroids.row(j) {
                    return bad(format!("centroids {j} and {i} coincide"));
                }
                if labels[i] == labels[j] {
                    return bad(format!("clusters {j} and {i} share label {:?}", labels[i]));
                }
            }
        }
        Ok(Self { centroids, labels })
    }

    pub fn k(&self) -> usize {
        self.centroids.rows()
    }

    /// Score-space dimensionality.
    pub fn c(&self) -> usize {
        self.centroids.cols()
    }

    pub fn centroids(&self) -> &Matrix {
        &self.centroids
    }

    /// `labels()[j]` is the label of cluster `j`.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Cluster whose centroid is nearest to `point`.
    pub fn nearest(&self, point: &[f64]) -> usize {
        nearest_centroid(&self.centroids, point).0
    }

    /// Nearest-centroid label for every score row.
    pub fn classify(&self, scores: &ScoreTable) -> Result<Vec<String>> {
        if scores.component_count() != self.c() {
            return Err(Error::DimensionMismatch { expected: self.c(), found: scores.component_count() });
        }
        Ok((0..scores.len()).map(|i| self.labels[self.nearest(scores.row(i))].clone()).collect())
    }

    /// Euclidean distance to each centroid, divided by their sum. A point
    /// that sits on every centroid at once (only possible for k = 1) gets
    /// uniform weights.
    pub fn normalized_distances(&self, point: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = self
            .centroids
            .row_iter()
            .map(|c| libm::sqrt(crate::linalg::squared_distance(point, c)))
            .collect();
        let total: f64 = d.iter().sum();
        if total == 0.0 {
            return vec![1.0 / d.len() as f64; d.len()];
        }
        d.iter().map(|x| x / total).collect()
    }
}

/// One-to-one cluster → label assignment maximizing the number of rows whose
/// cluster maps to their own label. Every injective assignment is searched;
/// ties resolve to the first one found when clusters take labels in sorted
/// order.
pub fn map_clusters_to_labels(assignments: &[usize], labels: &[String], k: usize) -> Result<Vec<String>> {
    if assignments.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: assignments.len(), found: labels.len() });
    }
    if k == 0 || k > MAX_MAPPED_CLUSTERS {
        return Err(Error::InvalidConfig(format!("cluster count must be in 1..={MAX_MAPPED_CLUSTERS}, got {k}")));
    }
    let mut distinct: Vec<&String> = labels.iter().collect();
    distinct.sort();
    distinct.dedup();
    if distinct.len() < k {
        return Err(Error::NotEnoughLabels { clusters: k, labels: distinct.len() });
    }
    // agreement[c][l] = rows in cluster c with label l
    let mut agreement = vec![vec![0usize; distinct.len()]; k];
    for (&c, l) in assignments.iter().zip(labels) {
        if c >= k {
            return Err(Error::InvalidConfig(format!("assignment {c} out of range for {k} clusters")));
        }
        let li = distinct.binary_search(&l).expect("label collected above");
        agreement[c][li] += 1;
    }

    struct Search<'a> {
        agreement: &'a [Vec<usize>],
        used: Vec<bool>,
        current: Vec<usize>,
        best: Option<(usize, Vec<usize>)>,
    }
    impl Search<'_> {
        fn run(&mut self, cluster: usize, score: usize) {
            if cluster == self.agreement.len() {
                if self.best.as_ref().is_none_or(|(b, _)| score > *b) {
                    self.best = Some((score, self.current.clone()));
                }
                return;
            }
            for l in 0..self.used.len() {
                if !self.used[l] {
                    self.used[l] = true;
                    self.current.push(l);
                    self.run(cluster + 1, score + self.agreement[cluster][l]);
                    self.current.pop();
                    self.used[l] = false;
                }
            }
        }
    }
    let mut search = Search { agreement: &agreement, used: vec![false; distinct.len()], current: Vec::new(), best: None };
    search.run(0, 0);
    let (_, mapping) = search.best.expect("k ≤ label count");
    Ok(mapping.into_iter().map(|l| distinct[l].clone()).collect())
}

/// Where one untrained tap lands relative to the trained regions.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub score: Vec<f64>,
    pub nearest: String,
    /// Distance to each centroid over the sum of distances, in cluster order.
    pub normalized_distances: Vec<f64>,
}

/// Projects untrained taps into the region model's score space.
pub fn project_unknown(pca: &PcaModel, regions: &RegionModel, table: &TapTable) -> Result<Vec<Placement>> {
    let scores = pca.transform(table, regions.c())?;
    Ok((0..scores.len())
        .map(|i| {
            let s = scores.row(i);
            Placement {
                score: s.to_vec(),
                nearest: regions.labels()[regions.nearest(s)].clone(),
                normalized_distances: regions.normalized_distances(s),
            }
        })
        .collect())
}

/// Counts of true class (rows) against predicted class (columns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn get(&self, true_class: usize, predicted: usize) -> usize {
        self.counts[true_class][predicted]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Correct predictions.
    pub fn trace(&self) -> usize {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<usize> {
        (0..self.labels.len()).map(|i| self.counts[i][i]).collect()
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.trace() as f64 / t as f64,
        }
    }
}

/// Tallies predictions against truth over the classes in `class_order`.
pub fn confusion(true_labels: &[String], predicted: &[String], class_order: &[String]) -> Result<ConfusionMatrix> {
    if true_labels.len() != predicted.len() {
        return Err(Error::DimensionMismatch { expected: true_labels.len(), found: predicted.len() });
    }
    let index = |l: &String| {
        class_order.iter().position(|c| c == l).ok_or_else(|| Error::UnknownLabel(l.clone()))
    };
    let k = class_order.len();
    let mut counts = vec![vec![0usize; k]; k];
    for (t, p) in true_labels.iter().zip(predicted) {
        counts[index(t)?][index(p)?] += 1;
    }
    Ok(ConfusionMatrix { labels: class_order.to_vec(), counts })
}

impl fmt::Display for ConfusionMatrix {
    /// Aligned table: true classes down, predicted classes across.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let header = "true \\ predicted";
        let mut width = header.len();
        for l in &self.labels {
            width = width.max(l.len());
        }
        for row in &self.counts {
            for c in row {
                width = width.max(format!("{c}").len());
            }
        }
        write!(f, "{header:<width$}")?;
        for l in &self.labels {
            write!(f, "  {l:>width$}")?;
        }
        writeln!(f)?;
        for (l, row) in self.labels.iter().zip(&self.counts) {
            write!(f, "{l:<width$}")?;
            for c in row {
                write!(f, "  {c:>width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
