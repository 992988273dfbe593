//! Principal component analysis by SVD of the centered tap table.
//!
//! For an `m × n` table `A` with column means `μ`, the centered matrix is
//! factored as `A − 1μᵀ = V Δ Uᵀ`. The columns of `U` are the principal
//! axes, the training scores are `S = V Δ = (A − 1μᵀ) U`, and new taps are
//! projected with `S_t = (A_t − 1μᵀ) U[:, ..c]`. Explained variance ratios
//! are the normalized squared singular values.

use alloc::format;
use alloc::vec::Vec;

use crate::linalg::{jacobi_svd, Matrix};
use crate::table::{ScoreTable, TapTable};
use crate::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-8;
const EXPLAINED_SUM_TOL: f64 = 1e-9;

/// A fitted PCA projection.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    projection: Matrix,
    singular_values: Vec<f64>,
    explained: Vec<f64>,
}

impl PcaModel {
    /// Fits the model to a training table (at least two rows, finite, not
    /// constant).
    pub fn fit(table: &TapTable) -> Result<Self> {
        let (m, n) = (table.m(), table.n());
        if m < 2 {
            return Err(Error::TooFewRows { needed: 2, found: m });
        }
        if n == 0 {
            return Err(Error::InvalidConfig("table has no variables".into()));
        }
        let a = table.matrix();
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let first = a.row(0);
        if a.row_iter().all(|r| r == first) {
            return Err(Error::ZeroVariance);
        }

        let mean = column_means(a);
        let centered = center(a, &mean);
        let svd = jacobi_svd(&centered);

        let mut projection = svd.right;
        normalize_signs(&mut projection);
        let singular_values: Vec<f64> = svd.values[..m.min(n)].to_vec();
        let explained = explained_from_singular(&singular_values)?;
        Ok(Self { mean, projection, singular_values, explained })
    }

    /// Rebuilds a model from stored parts, checking every invariant.
    pub fn from_parts(mean: Vec<f64>, projection: Matrix, singular_values: Vec<f64>, explained: Vec<f64>) -> Result<Self> {
        let model = Self { mean, projection, singular_values, explained };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.mean.len();
        let bad = |msg: alloc::string::String| Err(Error::InvariantViolation(msg));
        if n == 0 {
            return bad("model has no variables".into());
        }
        if self.projection.rows() != n || self.projection.cols() != n {
            return bad(format!(
                "projection is {}x{}, expected {n}x{n}",
                self.projection.rows(),
                self.projection.cols()
            ));
        }
        if self.singular_values.is_empty() || self.singular_values.len() > n {
            return bad(format!("{} singular values for {n} variables", self.singular_values.len()));
        }
        if self.explained.len() != self.singular_values.len() {
            return bad("explained ratios and singular values differ in length".into());
        }
        if !self.projection.is_finite()
            || self.mean.iter().chain(&self.singular_values).chain(&self.explained).any(|v| !v.is_finite())
        {
            return bad("model contains non-finite values".into());
        }
        let gram = self.projection.transpose().matmul(&self.projection)?;
        let err = gram.max_abs_diff(&Matrix::identity(n));
        if err > ORTHONORMAL_TOL {
            return bad(format!("projection columns are not orthonormal (max |UᵀU − I| = {err:e})"));
        }
        if self.singular_values.iter().any(|&s| s < 0.0) {
            return bad("singular values must be non-negative".into());
        }
        if self.singular_values.windows(2).any(|w| w[0] < w[1]) {
            return bad("singular values must be sorted non-increasing".into());
        }
        if self.explained.iter().any(|&p| p < 0.0) {
            return bad("explained ratios must be non-negative".into());
        }
        let sum: f64 = self.explained.iter().sum();
        if (sum - 1.0).abs() > EXPLAINED_SUM_TOL {
            return bad(format!("explained ratios sum to {sum}, expected 1"));
        }
        let expected = explained_from_singular(&self.singular_values)
            .map_err(|_| Error::InvariantViolation("all singular values are zero".into()))?;
        if expected.iter().zip(&self.explained).any(|(a, b)| (a - b).abs() > EXPLAINED_SUM_TOL) {
            return bad("explained ratios do not match the singular values".into());
        }
        for j in 0..n {
            let col = self.projection.column(j);
            if col[largest_magnitude_index(&col)] < 0.0 {
                return bad(format!("projection column {j} breaks the sign convention"));
            }
        }
        Ok(())
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Principal axes as columns, ordered by decreasing singular value.
    pub fn projection(&self) -> &Matrix {
        &self.projection
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Fraction of total variance carried by each component.
    pub fn explained_variance(&self) -> &[f64] {
        &self.explained
    }

    /// Scores of `table` on the first `c` principal components.
    pub fn transform(&self, table: &TapTable, c: usize) -> Result<ScoreTable> {
        let n = self.n();
        if table.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: table.n() });
        }
        if c == 0 || c > n {
            return Err(Error::InvalidConfig(format!("component count must be in 1..={n}, got {c}")));
        }
        let centered = center(table.matrix(), &self.mean);
        let scores = centered.matmul(&self.projection.leading_columns(c))?;
        ScoreTable::new(scores, table.labels().map(<[_]>::to_vec))
    }

    /// Maps scores back to variable space: `S U[:, ..c]ᵀ + 1μᵀ`.
    pub fn reconstruct(&self, scores: &ScoreTable) -> Result<TapTable> {
        let c = scores.component_count();
        if c > self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: c });
        }
        let basis = self.projection.leading_columns(c).transpose();
        let mut out = scores.matrix().matmul(&basis)?;
        for i in 0..out.rows() {
            for (v, mu) in out.row_mut(i).iter_mut().zip(&self.mean) {
                *v += mu;
            }
        }
        TapTable::from_matrix(out, scores.labels().map(<[_]>::to_vec))
    }
}

/// Smallest `c` whose cumulative explained ratio reaches `threshold`.
pub fn select_components(explained: &[f64], threshold: f64) -> Result<usize> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidConfig(format!("threshold must be in (0, 1], got {threshold}")));
    }
    let mut cumulative = 0.0;
    for (k, p) in explained.iter().enumerate() {
        cumulative += p;
        // Rounding can leave the full sum a hair under 1.
        if cumulative >= threshold || k + 1 == explained.len() {
            return Ok(k + 1);
        }
    }
    Err(Error::InvalidConfig("no explained-variance ratios".into()))
}

fn column_means(a: &Matrix) -> Vec<f64> {
    let mut mean = alloc::vec![0.0; a.cols()];
    for row in a.row_iter() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    let rows = a.rows() as f64;
    mean.iter_mut().for_each(|m| *m /= rows);
    mean
}

fn center(a: &Matrix, mean: &[f64]) -> Matrix {
    let mut out = a.clone();
    for i in 0..out.rows() {
        for (v, mu) in out.row_mut(i).iter_mut().zip(mean) {
            *v -= mu;
        }
    }
    out
}

fn explained_from_singular(values: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = values.iter().map(|s| s * s).sum();
    if total <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(values.iter().map(|s| s * s / total).collect())
}

/// First index attaining the largest absolute value.
fn largest_magnitude_index(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

/// Flips each column so its largest-magnitude entry is positive.
fn normalize_signs(u: &mut Matrix) {
    for j in 0..u.cols() {
        let col = u.column(j);
        if col[largest_magnitude_index(&col)] < 0.0 {
            for i in 0..u.rows() {
                u[(i, j)] = -u[(i, j)];
            }
        }
    }
}
