//! CSV tables.
//!
//! Tap tables use a header `label,v1,...,vn` and one row per tap; the label
//! cell is empty for unlabeled taps. Score files use `label,pc1,...,pcc`,
//! optionally followed by more columns (`predicted`, per-centroid distances)
//! that readers ignore unless they ask for them. Floats are written with 17
//! significant digits so a write-then-read returns identical values.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use taptest_core::{ConfusionMatrix, Matrix, ScoreTable, TapTable};

use crate::error::{Error, Result};

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    }
}

pub fn write_tap_table(path: &Path, table: &TapTable) -> Result<()> {
    if table.is_empty() {
        return Err(Error::Usage(format!("{}: refusing to write an empty table", path.display())));
    }
    let mut w = writer(path)?;
    let mut header = vec!["label".to_string()];
    header.extend((1..=table.n()).map(|j| format!("v{j}")));
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (i, row) in table.rows().enumerate() {
        let mut rec = vec![table.label(i).unwrap_or("").to_string()];
        rec.extend(row.iter().map(|&v| fmt_f64(v)));
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

struct RawCsv {
    header: Vec<String>,
    records: Vec<csv::StringRecord>,
}

fn read_raw(path: &Path) -> Result<RawCsv> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let header = r.headers().map_err(|e| csv_error(path, e))?.iter().map(str::to_owned).collect::<Vec<_>>();
    let mut records = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.len() != header.len() {
            return Err(Error::format(
                path,
                format!("row {} has {} fields, expected {}", i + 1, rec.len(), header.len()),
            ));
        }
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::format(path, "no data rows"));
    }
    Ok(RawCsv { header, records })
}

fn parse_cell(path: &Path, row: usize, col: usize, cell: &str) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .map_err(|_| Error::format(path, format!("row {row}, column {col}: {cell:?} is not a number")))
}

/// Labels column; `None` when every label is empty.
fn labels_from(path: &Path, raw: &RawCsv, col: usize) -> Result<Option<Vec<String>>> {
    let labels: Vec<String> = raw.records.iter().map(|r| r[col].to_string()).collect();
    let empty = labels.iter().filter(|l| l.is_empty()).count();
    match empty {
        0 => Ok(Some(labels)),
        e if e == labels.len() => Ok(None),
        _ => {
            let row = labels.iter().position(String::is_empty).unwrap() + 1;
            Err(Error::format(path, format!("row {row} has no label but other rows do")))
        }
    }
}

pub fn read_tap_table(path: &Path) -> Result<TapTable> {
    let raw = read_raw(path)?;
    if raw.header.first().map(String::as_str) != Some("label") || raw.header.len() < 2 {
        return Err(Error::format(path, "expected header label,v1,...,vn"));
    }
    let n = raw.header.len() - 1;
    let mut data = Vec::with_capacity(raw.records.len() * n);
    for (i, rec) in raw.records.iter().enumerate() {
        for j in 1..=n {
            data.push(parse_cell(path, i + 1, j + 1, &rec[j])?);
        }
    }
    let labels = labels_from(path, &raw, 0)?;
    let m = raw.records.len();
    Ok(TapTable::from_matrix(Matrix::from_row_major(m, n, data)?, labels)?)
}

/// Per-row score data read from any score-bearing CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreFile {
    pub scores: ScoreTable,
    /// `predicted` column, when present.
    pub predicted: Option<Vec<String>>,
}

impl ScoreFile {
    /// Label to colour a point by: the true label, else the prediction.
    pub fn display_label(&self, i: usize) -> &str {
        if let Some(l) = self.scores.labels() {
            return &l[i];
        }
        self.predicted.as_ref().map_or("unlabeled", |p| p[i].as_str())
    }
}

pub fn read_scores(path: &Path) -> Result<ScoreFile> {
    let raw = read_raw(path)?;
    let label_col = raw.header.iter().position(|h| h == "label");
    let pc_cols: Vec<usize> = (1..)
        .map_while(|k| raw.header.iter().position(|h| *h == format!("pc{k}")))
        .collect();
    if pc_cols.is_empty() {
        return Err(Error::format(path, "no pc1 column"));
    }
    let mut data = Vec::with_capacity(raw.records.len() * pc_cols.len());
    for (i, rec) in raw.records.iter().enumerate() {
        for &j in &pc_cols {
            data.push(parse_cell(path, i + 1, j + 1, &rec[j])?);
        }
    }
    let labels = match label_col {
        Some(c) => labels_from(path, &raw, c)?,
        None => None,
    };
    let predicted = match raw.header.iter().position(|h| h == "predicted") {
        Some(c) => labels_from(path, &raw, c)?,
        None => None,
    };
    let m = raw.records.len();
    let scores = ScoreTable::new(Matrix::from_row_major(m, pc_cols.len(), data)?, labels)?;
    Ok(ScoreFile { scores, predicted })
}

pub fn write_scores(path: &Path, scores: &ScoreTable) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["label".to_string()];
    header.extend((1..=scores.component_count()).map(|k| format!("pc{k}")));
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for i in 0..scores.len() {
        let mut rec = vec![scores.labels().map_or("", |l| l[i].as_str()).to_string()];
        rec.extend(scores.row(i).iter().map(|&v| fmt_f64(v)));
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One classified tap: `label,predicted,pc1..pcc,dist_<label>...`.
pub struct PredictionRow<'a> {
    pub label: Option<&'a str>,
    pub predicted: &'a str,
    pub score: &'a [f64],
    pub normalized_distances: &'a [f64],
}

pub fn write_predictions<'a>(
    path: &Path,
    region_labels: &[String],
    rows: impl IntoIterator<Item = PredictionRow<'a>>,
) -> Result<()> {
    let mut w = writer(path)?;
    let mut rows = rows.into_iter().peekable();
    let c = rows.peek().map_or(0, |r| r.score.len());
    let mut header = vec!["label".to_string(), "predicted".to_string()];
    header.extend((1..=c).map(|k| format!("pc{k}")));
    header.extend(region_labels.iter().map(|l| format!("dist_{l}")));
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        let mut rec = vec![row.label.unwrap_or("").to_string(), row.predicted.to_string()];
        rec.extend(row.score.iter().chain(row.normalized_distances).map(|&v| fmt_f64(v)));
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Confusion matrix as CSV: header `true\predicted,<labels>`, one row per
/// true class.
pub fn write_confusion(path: &Path, cm: &ConfusionMatrix) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["true\\predicted".to_string()];
    header.extend(cm.labels().iter().cloned());
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (label, row) in cm.labels().iter().zip(cm.counts()) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(usize::to_string));
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `text` to `path`, mapping failures to I/O errors.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
