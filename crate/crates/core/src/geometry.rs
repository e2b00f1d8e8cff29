//! Bregman distances for the two supported geometries.

use serde::{Deserialize, Serialize};

use crate::error::check_dims;
use crate::{Error, Result, Vector, FEAS_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Euclidean,
    /// Negative entropy on the unit simplex; reference norm is l1.
    Entropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BregmanGeometry {
    pub kind: GeometryKind,
}

impl BregmanGeometry {
    pub const EUCLIDEAN: Self = Self { kind: GeometryKind::Euclidean };
    pub const ENTROPY: Self = Self { kind: GeometryKind::Entropy };

    pub fn distance(&self, x: &Vector, xbar: &Vector) -> Result<f64> {
        match self.kind {
            GeometryKind::Euclidean => bregman_euclidean(x, xbar),
            GeometryKind::Entropy => bregman_entropy(x, xbar),
        }
    }

    /// Gradient of the distance-generating function.
    pub fn mirror_gradient(&self, x: &Vector) -> Result<Vector> {
        match self.kind {
            GeometryKind::Euclidean => Ok(x.clone()),
            GeometryKind::Entropy => {
                if x.iter().any(|&v| v <= 0.0) {
                    return Err(Error::Domain("entropy mirror map needs x > 0".into()));
                }
                Ok(x.map(|v| v.ln() + 1.0))
            }
        }
    }

    /// The norm the distance is 1-strongly convex with respect to.
    pub fn reference_norm(&self, v: &Vector) -> f64 {
        match self.kind {
            GeometryKind::Euclidean => v.norm(),
            GeometryKind::Entropy => crate::linalg::norm1(v),
        }
    }
}

/// `0.5 * ||x - xbar||^2`.
pub fn bregman_euclidean(x: &Vector, xbar: &Vector) -> Result<f64> {
    check_dims(x.len(), xbar.len())?;
    Ok(0.5 * (x - xbar).norm_squared())
}

/// Relative entropy `sum y_i ln(y_i / ybar_i)` with `0 ln 0 = 0`.
pub fn bregman_entropy(y: &Vector, ybar: &Vector) -> Result<f64> {
    check_dims(y.len(), ybar.len())?;
    if ybar.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("entropy anchor must be strictly positive".into()));
    }
    if (ybar.sum() - 1.0).abs() > FEAS_TOL * ybar.len() as f64 {
        return Err(Error::Domain("entropy anchor not on the simplex".into()));
    }
    if y.iter().any(|&v| v < -FEAS_TOL || !v.is_finite()) || (y.sum() - 1.0).abs() > FEAS_TOL * y.len() as f64 {
        return Err(Error::Domain("entropy argument outside the simplex".into()));
    }
    let mut d = 0.0;
    for (yi, bi) in y.iter().zip(ybar.iter()) {
        if *yi > 0.0 {
            d += yi * (yi / bi).ln();
        }
    }
    // roundoff can push an exact zero slightly negative
    Ok(d.max(0.0))
}
