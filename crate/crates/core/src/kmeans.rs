//! Lloyd's k-means with distance-weighted seeding and seeded restarts.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::linalg::{squared_distance, Matrix};
use crate::seed::{rng_for, Key};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub seed: u64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self { restarts: 10, max_iter: 300, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    /// `k × c` centroids.
    pub centroids: Matrix,
    pub assignments: Vec<usize>,
    /// Sum of squared distances from each point to its centroid.
    pub objective: f64,
    /// Index of the restart that produced this fit.
    pub best_restart: usize,
    /// Objective after every assignment step, one trace per restart.
    pub traces: Vec<Vec<f64>>,
}

/// Result of a single Lloyd run from fixed initial centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydRun {
    pub centroids: Matrix,
    pub assignments: Vec<usize>,
    pub objective: f64,
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// Best of `options.restarts` seeded Lloyd runs. Ties on the objective go to
/// the earliest restart.
pub fn kmeans_fit(points: &Matrix, k: usize, options: &KMeansOptions) -> Result<KMeansFit> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    if options.restarts == 0 || options.max_iter == 0 {
        return Err(Error::InvalidConfig("restarts and max_iter must be at least 1".into()));
    }
    if !points.is_finite() {
        return Err(Error::NonFinite);
    }
    let distinct = count_distinct_rows(points);
    if k > distinct {
        return Err(Error::TooManyClusters { k, distinct });
    }

    let mut best: Option<(usize, LloydRun)> = None;
    let mut traces = Vec::with_capacity(options.restarts);
    for restart in 0..options.restarts {
        let init = seed_centroids(points, k, options.seed, restart);
        let run = lloyd(points, init, options.max_iter);
        traces.push(run.trace.clone());
        if best.as_ref().is_none_or(|(_, b)| run.objective < b.objective) {
            best = Some((restart, run));
        }
    }
    let (best_restart, run) = best.expect("at least one restart");
    Ok(KMeansFit {
        centroids: run.centroids,
        assignments: run.assignments,
        objective: run.objective,
        best_restart,
        traces,
    })
}

/// k-means++ style seeding: the first centre is a uniformly drawn row, each
/// further centre is drawn with probability proportional to its squared
/// distance from the nearest centre chosen so far.
fn seed_centroids(points: &Matrix, k: usize, seed: u64, restart: usize) -> Matrix {
    let mut rng = rng_for(seed, &[Key::Str("kmeans"), Key::Int(restart as u64)]);
    let m = points.rows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..m));
    let mut nearest: Vec<f64> = (0..m).map(|i| squared_distance(points.row(i), points.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        // k ≤ distinct rows, so some row is still at positive distance.
        let mut target = rng.random::<f64>() * total;
        let mut pick = None;
        for (i, &d) in nearest.iter().enumerate() {
            if d > 0.0 {
                pick = Some(i);
                if target < d {
                    break;
                }
                target -= d;
            }
        }
        let pick = pick.expect("a row at positive distance");
        chosen.push(pick);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(squared_distance(points.row(i), points.row(pick)));
        }
    }
    let rows: Vec<&[f64]> = chosen.iter().map(|&i| points.row(i)).collect();
    Matrix::from_rows(&rows).expect("rows share a width")
}

/// Index of the nearest centroid by squared distance; ties go to the lowest
/// index.
pub fn nearest_centroid(centroids: &Matrix, point: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for j in 0..centroids.rows() {
        let d = squared_distance(point, centroids.row(j));
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Lloyd iteration from `centroids` until the assignments stop changing or
/// `max_iter` assignment steps have run.
pub fn lloyd(points: &Matrix, mut centroids: Matrix, max_iter: usize) -> LloydRun {
    let (m, k) = (points.rows(), centroids.rows());
    let mut assignments = vec![usize::MAX; m];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut objective = f64::INFINITY;
    let mut repaired = false;

    for _ in 0..max_iter {
        let mut changed = false;
        objective = 0.0;
        for i in 0..m {
            let (j, d) = nearest_centroid(&centroids, points.row(i));
            objective += d;
            if assignments[i] != j {
                assignments[i] = j;
                changed = true;
            }
        }
        debug_assert!(
            trace.last().is_none_or(|&prev: &f64| objective <= prev + 1e-12 * prev.max(1.0)),
            "k-means objective increased"
        );
        trace.push(objective);
        // A repaired centroid sits on a single point, so one more update is
        // needed before the centroids are means of their clusters.
        if !changed && !repaired {
            converged = true;
            break;
        }
        update_centroids(points, &assignments, &mut centroids);
        repaired = repair_empty_clusters(points, &mut assignments, &mut centroids, k);
    }
    LloydRun { centroids, assignments, objective, trace, converged }
}

fn update_centroids(points: &Matrix, assignments: &[usize], centroids: &mut Matrix) {
    let c = points.cols();
    let mut sums = Matrix::zeros(centroids.rows(), c);
    let mut counts = vec![0usize; centroids.rows()];
    for (i, &j) in assignments.iter().enumerate() {
        counts[j] += 1;
        for (s, v) in sums.row_mut(j).iter_mut().zip(points.row(i)) {
            *s += v;
        }
    }
    for (j, &count) in counts.iter().enumerate() {
        if count > 0 {
            for (dst, s) in centroids.row_mut(j).iter_mut().zip(sums.row(j)) {
                *dst = s / count as f64;
            }
        }
    }
}

/// Moves each empty centroid onto the point farthest from its current
/// centroid. That point is reassigned immediately so two empty clusters
/// never grab the same point.
fn repair_empty_clusters(points: &Matrix, assignments: &mut [usize], centroids: &mut Matrix, k: usize) -> bool {
    let mut repaired = false;
    let mut counts = vec![0usize; k];
    for &j in assignments.iter() {
        counts[j] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let far = (0..points.rows())
            .filter(|&i| counts[assignments[i]] > 1)
            .map(|i| (i, squared_distance(points.row(i), centroids.row(assignments[i]))))
            .fold(None, |acc: Option<(usize, f64)>, (i, d)| match acc {
                Some((_, bd)) if bd >= d => acc,
                _ => Some((i, d)),
            });
        if let Some((i, _)) = far {
            counts[assignments[i]] -= 1;
            counts[empty] += 1;
            assignments[i] = empty;
            centroids.row_mut(empty).copy_from_slice(points.row(i));
            repaired = true;
        }
    }
    repaired
}

fn count_distinct_rows(points: &Matrix) -> usize {
    let mut rows: Vec<&[f64]> = points.row_iter().collect();
    rows.sort_by(|a, b| {
        a.iter().zip(b.iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(core::cmp::Ordering::Equal)
    });
    rows.dedup();
    rows.len()
}
