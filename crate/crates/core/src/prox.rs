//! Exact projections and prox maps used by the problem instances.

use crate::error::check_dims;
use crate::{Error, Result, Vector};

/// Componentwise clamp onto `[lo, hi]^n`.
pub fn project_box(v: &Vector, lo: f64, hi: f64) -> Result<Vector> {
    if lo > hi {
        return Err(Error::Domain(format!("empty box [{lo}, {hi}]")));
    }
    Ok(v.map(|e| e.clamp(lo, hi)))
}

/// Euclidean projection onto the unit simplex by sort and threshold.
pub fn project_simplex(v: &Vector) -> Result<Vector> {
    let n = v.len();
    if n == 0 {
        return Err(Error::Domain("simplex of dimension zero".into()));
    }
    crate::linalg::check_finite(v, "simplex projection input")?;
    let mut u: Vec<f64> = v.iter().copied().collect();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    let mut out = v.map(|e| (e - theta).max(0.0));
    // renormalize away the last ulp of drift
    let s = out.sum();
    if s > 0.0 {
        out /= s;
    }
    Ok(out)
}

/// Entropy prox on the simplex: `argmin -<s, y> + KL(y, ybar) / sigma`,
/// i.e. `ybar_i exp(sigma s_i)` normalized, evaluated with max-subtraction.
pub fn entropy_prox_simplex(ybar: &Vector, s: &Vector, sigma: f64) -> Result<Vector> {
    check_dims(ybar.len(), s.len())?;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Prox(format!("entropy prox step must be positive, got {sigma}")));
    }
    if ybar.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Prox("entropy prox anchor must be strictly positive".into()));
    }
    let logits: Vec<f64> = ybar.iter().zip(s.iter()).map(|(y, si)| y.ln() + sigma * si).collect();
    if logits.iter().any(|l| !l.is_finite()) {
        return Err(Error::NonFinite("entropy prox logits"));
    }
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = w.iter().sum();
    let mut out = Vector::from_iterator(w.len(), w.iter().map(|wi| wi / z));
    // keep iterates strictly inside so the distance stays defined
    let floor = f64::MIN_POSITIVE;
    if out.iter().any(|&v| v < floor) {
        out.apply(|v| *v = v.max(floor));
        let z = out.sum();
        out /= z;
    }
    Ok(out)
}

fn hyperplane_residual(v: &Vector, b: &Vector, nu: f64, hi: f64) -> f64 {
    v.iter().zip(b.iter()).map(|(vi, bi)| bi * (vi - nu * bi).clamp(0.0, hi)).sum()
}

/// Euclidean projection onto `{0 <= x <= c} ∩ {<b, x> = 0}` for `b` in
/// `{-1, +1}^n`. `c = f64::INFINITY` gives the orthant-hyperplane case.
pub fn project_box_hyperplane(v: &Vector, c: f64, b: &Vector) -> Result<Vector> {
    check_dims(v.len(), b.len())?;
    if !(c > 0.0) {
        return Err(Error::Domain(format!("box upper bound must be positive, got {c}")));
    }
    if b.iter().any(|&e| e != 1.0 && e != -1.0) {
        return Err(Error::Domain("hyperplane normal must have entries in {-1, +1}".into()));
    }
    crate::linalg::check_finite(v, "hyperplane projection input")?;
    // g(nu) = <b, clamp(v - nu b, 0, c)> is nonincreasing and piecewise
    // linear with kinks where a coordinate hits 0 or c
    let mut kinks: Vec<f64> = Vec::with_capacity(2 * v.len());
    for (vi, bi) in v.iter().zip(b.iter()) {
        kinks.push(vi * bi);
        if c.is_finite() {
            kinks.push((vi - c) * bi);
        }
    }
    kinks.sort_by(f64::total_cmp);
    let first_nonpos = kinks.partition_point(|&k| hyperplane_residual(v, b, k, c) > 0.0);
    let nu = if first_nonpos < kinks.len() && hyperplane_residual(v, b, kinks[first_nonpos], c) == 0.0 {
        kinks[first_nonpos]
    } else {
        // the root lies strictly between two kinks, where the active set is fixed
        let inside = match (first_nonpos.checked_sub(1).map(|i| kinks[i]), kinks.get(first_nonpos)) {
            (Some(a), Some(&z)) => 0.5 * (a + z),
            (None, Some(&z)) => z - 1.0,
            (Some(a), None) => a + 1.0,
            (None, None) => 0.0,
        };
        let (mut free, mut num) = (0usize, 0.0);
        for (vi, bi) in v.iter().zip(b.iter()) {
            let t = vi - inside * bi;
            if t > 0.0 && t < c {
                free += 1;
                num += bi * vi;
            } else if t >= c {
                num += bi * c;
            }
        }
        if free == 0 {
            return Err(Error::Prox("hyperplane multiplier search found no free coordinate".into()));
        }
        num / free as f64
    };
    Ok(Vector::from_iterator(
        v.len(),
        v.iter().zip(b.iter()).map(|(vi, bi)| (vi - nu * bi).clamp(0.0, c)),
    ))
}

/// Projection onto the nonnegative orthant, intersected with the ball of
/// radius `radius` when given.
pub fn project_orthant_ball(v: &Vector, radius: Option<f64>) -> Vector {
    let mut out = v.map(|e| e.max(0.0));
    if let Some(r) = radius {
        let n = out.norm();
        if n > r {
            out *= r / n;
        }
    }
    out
}
