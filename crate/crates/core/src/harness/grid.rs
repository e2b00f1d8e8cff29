//! Brute-force minimax on a tensor grid, for problems with at most three
//! coordinates in total.

use crate::oracle::SaddleOracle;
use crate::{Error, Result, Vector};

fn axis(lo: f64, hi: f64, res: usize) -> Vec<f64> {
    if res == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..res).map(|i| lo + (hi - lo) * i as f64 / (res - 1) as f64).collect()
}

fn tensor(bounds: &[(f64, f64)], res: usize) -> Vec<Vector> {
    let axes: Vec<Vec<f64>> = bounds.iter().map(|&(lo, hi)| axis(lo, hi, res)).collect();
    let mut out = vec![Vec::new()];
    for ax in &axes {
        out = out.into_iter().flat_map(|p| ax.iter().map(move |&v| {
            let mut q = p.clone();
            q.push(v);
            q
        })).collect();
    }
    out.into_iter().map(Vector::from_vec).collect()
}

/// Grid minimax of `L = f + Phi - h` over the boxes `bounds_x`, `bounds_y`
/// with `resolution` points per axis. Returns
/// `x* = argmin_x max_y L`, `y* = argmax_y min_x L` and `max_y min_x L`.
pub fn grid_saddle_oracle(
    oracle: &dyn SaddleOracle,
    bounds_x: &[(f64, f64)],
    bounds_y: &[(f64, f64)],
    resolution: usize,
) -> Result<(Vector, Vector, f64)> {
    let total = bounds_x.len() + bounds_y.len();
    if total > 3 {
        return Err(Error::Domain(format!("grid oracle supports at most 3 coordinates, got {total}")));
    }
    if bounds_x.len() != oracle.dim_x() || bounds_y.len() != oracle.dim_y() {
        return Err(Error::DimensionMismatch { expected: oracle.dim_x() + oracle.dim_y(), got: total });
    }
    if resolution == 0 || bounds_x.iter().chain(bounds_y).any(|&(lo, hi)| !(lo <= hi)) {
        return Err(Error::Domain("grid needs resolution >= 1 and ordered bounds".into()));
    }
    let xs = tensor(bounds_x, resolution);
    let ys = tensor(bounds_y, resolution);
    let table: Vec<Vec<f64>> = xs.iter().map(|x| ys.iter().map(|y| oracle.lagrangian(x, y)).collect()).collect();

    let (mut ix, mut upper) = (0, f64::INFINITY);
    for (i, row) in table.iter().enumerate() {
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m < upper {
            upper = m;
            ix = i;
        }
    }
    let (mut iy, mut lower) = (0, f64::NEG_INFINITY);
    for j in 0..ys.len() {
        let m = table.iter().map(|row| row[j]).fold(f64::INFINITY, f64::min);
        if m > lower {
            lower = m;
            iy = j;
        }
    }
    Ok((xs[ix].clone(), ys[iy].clone(), lower))
}
