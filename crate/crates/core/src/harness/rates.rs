//! Log-log slope fits over iteration-indexed metrics.

use std::path::Path;

use crate::engine::IterationRecord;
use crate::{Error, Result};

/// Least-squares slope of `log(value)` against `log(k)` over the points with
/// `k` in `[k_lo, k_hi]`.
pub fn rate_fit_points(points: &[(f64, f64)], k_lo: f64, k_hi: f64) -> Result<f64> {
    let sel: Vec<(f64, f64)> = points.iter().cloned().filter(|&(k, _)| k >= k_lo && k <= k_hi).collect();
    if sel.len() < 2 {
        return Err(Error::Domain(format!("need at least two points in [{k_lo}, {k_hi}]")));
    }
    if let Some(&(k, v)) = sel.iter().find(|&&(_, v)| !(v > 0.0)) {
        return Err(Error::Domain(format!("metric is nonpositive ({v}) at k = {k}")));
    }
    let n = sel.len() as f64;
    let lx: Vec<f64> = sel.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = sel.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all iteration indices coincide".into()));
    }
    Ok(sxy / sxx)
}

/// Metric columns available on an [`IterationRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Gap,
    Subopt,
    Infeas,
    WeightTotal,
    Tau,
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gap" => Ok(Self::Gap),
            "subopt" => Ok(Self::Subopt),
            "infeas" => Ok(Self::Infeas),
            "weight_total" => Ok(Self::WeightTotal),
            "tau" => Ok(Self::Tau),
            _ => Err(Error::Parse(format!("unknown metric '{s}'"))),
        }
    }
}

impl Metric {
    pub fn of(&self, r: &IterationRecord) -> Option<f64> {
        match self {
            Self::Gap => r.gap,
            Self::Subopt => r.subopt,
            Self::Infeas => r.infeas,
            Self::WeightTotal => Some(r.weight_total),
            Self::Tau => Some(r.tau),
        }
    }
}

/// Slope of `metric` over records with `k` in `k_range`. Records where the
/// metric is absent are skipped.
pub fn rate_fit(records: &[IterationRecord], metric: Metric, k_range: (usize, usize)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = records.iter().filter_map(|r| metric.of(r).map(|v| (r.k as f64, v))).collect();
    rate_fit_points(&pts, k_range.0 as f64, k_range.1 as f64)
}

/// `(k, value)` pairs of one column of a run CSV; empty cells are skipped.
pub fn read_csv_column(path: &Path, column: &str) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    let headers = r.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse(format!("column '{name}' not found")));
    let (ik, iv) = (find("k")?, find(column)?);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let cell = rec.get(iv).unwrap_or("");
        if cell.is_empty() {
            continue;
        }
        let k: f64 = rec.get(ik).unwrap_or("").parse().map_err(|_| Error::Parse("bad k cell".into()))?;
        let v: f64 = cell.parse().map_err(|_| Error::Parse(format!("bad {column} cell '{cell}'")))?;
        out.push((k, v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_powers() {
        let pts: Vec<(f64, f64)> = (1..=1000).map(|k| (k as f64, 1.0 / k as f64)).collect();
        assert!((rate_fit_points(&pts, 1.0, 1000.0).unwrap() + 1.0).abs() < 1e-6);
        let pts: Vec<(f64, f64)> = (1..=1000).map(|k| (k as f64, (k as f64).powi(-2))).collect();
        assert!((rate_fit_points(&pts, 1.0, 1000.0).unwrap() + 2.0).abs() < 1e-6);
    }

    #[test]
    fn nonpositive_rejected() {
        let pts = vec![(1.0, 1.0), (2.0, 0.0)];
        assert!(rate_fit_points(&pts, 1.0, 2.0).is_err());
    }
}
