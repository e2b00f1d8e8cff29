//! Small dense helpers shared across modules.

use crate::{Error, Matrix, Result, Vector};

pub fn check_finite(v: &Vector, what: &'static str) -> Result<()> {
    if v.iter().all(|e| e.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn is_finite(v: &Vector) -> bool {
    v.iter().all(|e| e.is_finite())
}

pub fn norm_inf(v: &Vector) -> f64 {
    v.iter().fold(0.0_f64, |m, e| m.max(e.abs()))
}

pub fn norm1(v: &Vector) -> f64 {
    v.iter().map(|e| e.abs()).sum()
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration, stopped
/// at `rel_tol` change in the Rayleigh quotient.
pub fn power_iteration(a: &Matrix, rel_tol: f64, max_iter: usize) -> f64 {
    let n = a.ncols();
    if n == 0 {
        return 0.0;
    }
    // deterministic start with no symmetry that could hide the top vector
    let mut v = Vector::from_fn(n, |i, _| 1.0 + 0.1 * ((i * 7919) % 13) as f64);
    v /= v.norm();
    let mut lambda = 0.0_f64;
    for _ in 0..max_iter {
        let w = a * &v;
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / nw;
        if (next - lambda).abs() <= rel_tol * next.abs().max(f64::MIN_POSITIVE) {
            return next.max(nw);
        }
        lambda = next;
    }
    lambda
}

/// Spectral norm of a symmetric matrix, by power iteration to `1e-6`
/// relative and inflated by 1% so that it can serve as a Lipschitz bound.
pub fn sym_norm_upper(a: &Matrix) -> f64 {
    let sq = a * a;
    power_iteration(&sq, 1e-9, 20_000).max(0.0).sqrt() * 1.01
}

/// Spectral norm of a general matrix via power iteration on `A^T A`,
/// inflated by 1%.
pub fn op_norm_upper(a: &Matrix) -> f64 {
    let g = a.transpose() * a;
    power_iteration(&g, 1e-9, 20_000).max(0.0).sqrt() * 1.01
}
