#![allow(dead_code)]

use apd_core::prox::project_box;
use apd_core::{LipschitzTriple, Result, SaddleOracle, Vector};

pub fn v(xs: &[f64]) -> Vector {
    Vector::from_vec(xs.to_vec())
}

/// `Phi(x, y) = k x y` on the real line, `f = h = 0`.
pub struct ScalarBilinear {
    pub k: f64,
}

impl SaddleOracle for ScalarBilinear {
    fn dim_x(&self) -> usize {
        1
    }
    fn dim_y(&self) -> usize {
        1
    }
    fn phi(&self, x: &Vector, y: &Vector) -> f64 {
        self.k * x[0] * y[0]
    }
    fn grad_x(&self, _x: &Vector, y: &Vector) -> Vector {
        y * self.k
    }
    fn grad_y(&self, x: &Vector, _y: &Vector) -> Vector {
        x * self.k
    }
    fn prox_f(&self, xbar: &Vector, g: &Vector, tau: f64) -> Result<Vector> {
        Ok(xbar - g * tau)
    }
    fn prox_h(&self, ybar: &Vector, s: &Vector, sigma: f64) -> Result<Vector> {
        Ok(ybar + s * sigma)
    }
    fn f_value(&self, _x: &Vector) -> f64 {
        0.0
    }
    fn h_value(&self, _y: &Vector) -> f64 {
        0.0
    }
    fn lipschitz(&self) -> Option<LipschitzTriple> {
        LipschitzTriple::new(0.0, self.k.abs(), 0.0).ok()
    }
    fn grad_y_depends_on_y(&self) -> bool {
        false
    }
}

/// `Phi(x, y) = x^2 y / 2` on `x in [-rx, rx]`, `y in [0, ry]`.
pub struct HalfSquareTimesY {
    pub rx: f64,
    pub ry: f64,
}

impl SaddleOracle for HalfSquareTimesY {
    fn dim_x(&self) -> usize {
        1
    }
    fn dim_y(&self) -> usize {
        1
    }
    fn phi(&self, x: &Vector, y: &Vector) -> f64 {
        0.5 * x[0] * x[0] * y[0]
    }
    fn grad_x(&self, x: &Vector, y: &Vector) -> Vector {
        v(&[x[0] * y[0]])
    }
    fn grad_y(&self, x: &Vector, _y: &Vector) -> Vector {
        v(&[0.5 * x[0] * x[0]])
    }
    fn prox_f(&self, xbar: &Vector, g: &Vector, tau: f64) -> Result<Vector> {
        project_box(&(xbar - g * tau), -self.rx, self.rx)
    }
    fn prox_h(&self, ybar: &Vector, s: &Vector, sigma: f64) -> Result<Vector> {
        project_box(&(ybar + s * sigma), 0.0, self.ry)
    }
    fn f_value(&self, x: &Vector) -> f64 {
        if x[0].abs() <= self.rx + 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn h_value(&self, y: &Vector) -> f64 {
        if y[0] >= -1e-12 && y[0] <= self.ry + 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn lipschitz(&self) -> Option<LipschitzTriple> {
        // |x y - x' y| <= ry |x - x'|, |x^2/2 - x'^2/2| <= rx |x - x'|
        LipschitzTriple::new(self.ry, self.rx, 0.0).ok()
    }
    fn grad_y_depends_on_y(&self) -> bool {
        false
    }
}

/// Wraps an oracle and replaces one method with a broken version.
pub struct Corrupted<'a> {
    pub inner: &'a dyn SaddleOracle,
    pub grad_bump: f64,
    pub lazy_prox: bool,
}

impl SaddleOracle for Corrupted<'_> {
    fn dim_x(&self) -> usize {
        self.inner.dim_x()
    }
    fn dim_y(&self) -> usize {
        self.inner.dim_y()
    }
    fn mu(&self) -> f64 {
        self.inner.mu()
    }
    fn phi(&self, x: &Vector, y: &Vector) -> f64 {
        self.inner.phi(x, y)
    }
    fn grad_x(&self, x: &Vector, y: &Vector) -> Vector {
        let mut g = self.inner.grad_x(x, y);
        g[0] += self.grad_bump;
        g
    }
    fn grad_y(&self, x: &Vector, y: &Vector) -> Vector {
        self.inner.grad_y(x, y)
    }
    fn prox_f(&self, xbar: &Vector, g: &Vector, tau: f64) -> Result<Vector> {
        if self.lazy_prox {
            Ok(xbar.clone())
        } else {
            self.inner.prox_f(xbar, g, tau)
        }
    }
    fn prox_h(&self, ybar: &Vector, s: &Vector, sigma: f64) -> Result<Vector> {
        self.inner.prox_h(ybar, s, sigma)
    }
    fn f_value(&self, x: &Vector) -> f64 {
        self.inner.f_value(x)
    }
    fn h_value(&self, y: &Vector) -> f64 {
        self.inner.h_value(y)
    }
    fn geom_x(&self) -> apd_core::BregmanGeometry {
        self.inner.geom_x()
    }
    fn geom_y(&self) -> apd_core::BregmanGeometry {
        self.inner.geom_y()
    }
}
