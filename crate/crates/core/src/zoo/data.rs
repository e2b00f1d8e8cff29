//! Labelled datasets: CSV ingestion and a synthetic two-blob generator.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Matrix, Result, Vector};

/// Feature matrix (one row per point) with labels in {-1, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vector,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vector) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch { expected: features.nrows(), got: labels.len() });
        }
        if labels.iter().any(|&l| l != 1.0 && l != -1.0) {
            return Err(Error::Domain("labels must be -1 or +1".into()));
        }
        let names = (0..features.ncols()).map(|j| format!("f{j}")).collect();
        Ok(Self { features, labels, feature_names: names })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Center every column and divide by its (population) standard deviation.
    /// Constant columns are dropped.
    pub fn normalized(&self) -> Self {
        let n = self.features.nrows() as f64;
        let mut cols = Vec::new();
        let mut names = Vec::new();
        for (j, col) in self.features.column_iter().enumerate() {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            if !(sd > 1e-12 * (1.0 + mean.abs())) {
                log::warn!("dropping constant feature column {}", self.feature_names[j]);
                continue;
            }
            cols.push(col.map(|v| (v - mean) / sd));
            names.push(self.feature_names[j].clone());
        }
        let features = if cols.is_empty() { Matrix::zeros(self.features.nrows(), 0) } else { Matrix::from_columns(&cols) };
        Self { features, labels: self.labels.clone(), feature_names: names }
    }

    /// Rows `idx` as a new dataset.
    pub fn subset(&self, idx: &[usize]) -> Self {
        let features = self.features.select_rows(idx);
        let labels = Vector::from_iterator(idx.len(), idx.iter().map(|&i| self.labels[i]));
        Self { features, labels, feature_names: self.feature_names.clone() }
    }

    pub fn write_csv(&self, path: &Path, label_column: &str) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
        let mut header = self.feature_names.clone();
        header.push(label_column.to_string());
        w.write_record(&header).map_err(|e| Error::Parse(e.to_string()))?;
        for i in 0..self.len() {
            let mut row: Vec<String> = self.features.row(i).iter().map(|v| format!("{v:e}")).collect();
            row.push(format!("{}", self.labels[i]));
            w.write_record(&row).map_err(|e| Error::Parse(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Read a header-first, comma-separated file. Labels may be {-1, +1} or
/// {0, 1}. Features are returned raw; call [`Dataset::normalized`] next.
pub fn read_csv_raw(path: &Path, label_column: &str) -> Result<Dataset> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    let headers = r.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| Error::Parse(format!("label column '{label_column}' not found")))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("row {}: {e}", line + 2)))?;
        let mut row = Vec::with_capacity(rec.len() - 1);
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: non-numeric cell '{cell}'", line + 2)))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("row {}: non-finite cell", line + 2)));
            }
            if j == label_idx {
                raw_labels.push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty dataset".into()));
    }
    let zero_one = raw_labels.iter().all(|&l| l == 0.0 || l == 1.0);
    let labels: Vec<f64> = raw_labels
        .iter()
        .map(|&l| match l {
            _ if zero_one => Ok(2.0 * l - 1.0),
            1.0 | -1.0 => Ok(l),
            _ => Err(Error::Parse(format!("label {l} is not in {{-1, +1}} or {{0, 1}}"))),
        })
        .collect::<Result<_>>()?;
    let p = rows[0].len();
    let features = Matrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    let names = headers.iter().enumerate().filter(|(j, _)| *j != label_idx).map(|(_, h)| h.trim().to_string()).collect();
    Ok(Dataset { features, labels: Vector::from_vec(labels), feature_names: names })
}

/// [`read_csv_raw`] followed by column normalization.
pub fn load_csv_dataset(path: &Path, label_column: &str) -> Result<Dataset> {
    Ok(read_csv_raw(path, label_column)?.normalized())
}

/// Two isotropic Gaussian clouds in `dim` dimensions with unit standard
/// deviation, centers `separation` apart along the first axis. Labels
/// alternate so every prefix is balanced.
pub fn blobs(n_points: usize, dim: usize, separation: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Matrix::zeros(n_points, dim);
    let mut labels = Vector::zeros(n_points);
    for i in 0..n_points {
        let lab = if i % 2 == 0 { 1.0 } else { -1.0 };
        labels[i] = lab;
        for j in 0..dim {
            let z: f64 = StandardNormal.sample(&mut rng);
            features[(i, j)] = z + if j == 0 { 0.5 * separation * lab } else { 0.0 };
        }
    }
    let feature_names = (0..dim).map(|j| format!("f{j}")).collect();
    Dataset { features, labels, feature_names }
}
