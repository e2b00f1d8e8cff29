//! The saddle-problem oracle and evaluation counting.

use std::cell::Cell;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::geometry::BregmanGeometry;
use crate::{Error, Result, Vector};

/// Constants of the coupling: `||grad_x Phi(x,y) - grad_x Phi(x',y)|| <= L_xx ||x-x'||`,
/// and `||grad_y Phi(x,y) - grad_y Phi(x',y')|| <= L_yy ||y-y'|| + L_yx ||x-x'||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzTriple {
    pub l_xx: f64,
    pub l_yx: f64,
    pub l_yy: f64,
}

impl LipschitzTriple {
    pub fn new(l_xx: f64, l_yx: f64, l_yy: f64) -> Result<Self> {
        if !(l_yx > 0.0) || !(l_xx >= 0.0) || !(l_yy >= 0.0) || !l_xx.is_finite() || !l_yx.is_finite() || !l_yy.is_finite() {
            return Err(Error::Domain(format!(
                "Lipschitz triple needs L_yx > 0 and L_xx, L_yy >= 0 (got {l_xx}, {l_yx}, {l_yy})"
            )));
        }
        Ok(Self { l_xx, l_yx, l_yy })
    }
}

/// One saddle problem `min_x max_y f(x) + Phi(x,y) - h(y)`.
///
/// `f` carries the strong-convexity modulus `mu`; `f_value`/`h_value` return
/// `+inf` outside the domains so gaps can be evaluated.
pub trait SaddleOracle {
    fn dim_x(&self) -> usize;
    fn dim_y(&self) -> usize;
    fn mu(&self) -> f64 {
        0.0
    }
    fn phi(&self, x: &Vector, y: &Vector) -> f64;
    fn grad_x(&self, x: &Vector, y: &Vector) -> Vector;
    fn grad_y(&self, x: &Vector, y: &Vector) -> Vector;
    /// `argmin_x f(x) + <g, x> + D_X(x, xbar) / tau`.
    fn prox_f(&self, xbar: &Vector, g: &Vector, tau: f64) -> Result<Vector>;
    /// `argmin_y h(y) - <s, y> + D_Y(y, ybar) / sigma`.
    fn prox_h(&self, ybar: &Vector, s: &Vector, sigma: f64) -> Result<Vector>;
    fn f_value(&self, x: &Vector) -> f64;
    fn h_value(&self, y: &Vector) -> f64;
    fn geom_x(&self) -> BregmanGeometry {
        BregmanGeometry::EUCLIDEAN
    }
    fn geom_y(&self) -> BregmanGeometry {
        BregmanGeometry::EUCLIDEAN
    }
    fn lipschitz(&self) -> Option<LipschitzTriple> {
        None
    }
    /// False when `grad_y Phi(x, y)` does not depend on `y` (Phi affine in y).
    /// Lets the line search skip a term that is identically zero.
    fn grad_y_depends_on_y(&self) -> bool {
        true
    }

    /// `L(x, y) = f(x) + Phi(x, y) - h(y)`.
    fn lagrangian(&self, x: &Vector, y: &Vector) -> f64 {
        let fx = self.f_value(x);
        let hy = self.h_value(y);
        if fx == f64::INFINITY {
            return f64::INFINITY;
        }
        if hy == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        fx + self.phi(x, y) - hy
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounters {
    pub phi: u64,
    pub grad_x: u64,
    pub grad_y: u64,
    pub prox_f: u64,
    pub prox_h: u64,
}

impl EvalCounters {
    pub fn grad_total(&self) -> u64 {
        self.grad_x + self.grad_y
    }
}

/// Thread-safe counting wrapper around any oracle.
pub struct Instrumented<O> {
    pub inner: O,
    phi: AtomicU64,
    grad_x: AtomicU64,
    grad_y: AtomicU64,
    prox_f: AtomicU64,
    prox_h: AtomicU64,
}

impl<O: SaddleOracle> Instrumented<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            phi: AtomicU64::new(0),
            grad_x: AtomicU64::new(0),
            grad_y: AtomicU64::new(0),
            prox_f: AtomicU64::new(0),
            prox_h: AtomicU64::new(0),
        }
    }

    pub fn counters(&self) -> EvalCounters {
        EvalCounters {
            phi: self.phi.load(Ordering::Relaxed),
            grad_x: self.grad_x.load(Ordering::Relaxed),
            grad_y: self.grad_y.load(Ordering::Relaxed),
            prox_f: self.prox_f.load(Ordering::Relaxed),
            prox_h: self.prox_h.load(Ordering::Relaxed),
        }
    }
}

impl<O: SaddleOracle> SaddleOracle for Instrumented<O> {
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
        self.phi.fetch_add(1, Ordering::Relaxed);
        self.inner.phi(x, y)
    }
    fn grad_x(&self, x: &Vector, y: &Vector) -> Vector {
        self.grad_x.fetch_add(1, Ordering::Relaxed);
        self.inner.grad_x(x, y)
    }
    fn grad_y(&self, x: &Vector, y: &Vector) -> Vector {
        self.grad_y.fetch_add(1, Ordering::Relaxed);
        self.inner.grad_y(x, y)
    }
    fn prox_f(&self, xbar: &Vector, g: &Vector, tau: f64) -> Result<Vector> {
        self.prox_f.fetch_add(1, Ordering::Relaxed);
        self.inner.prox_f(xbar, g, tau)
    }
    fn prox_h(&self, ybar: &Vector, s: &Vector, sigma: f64) -> Result<Vector> {
        self.prox_h.fetch_add(1, Ordering::Relaxed);
        self.inner.prox_h(ybar, s, sigma)
    }
    fn f_value(&self, x: &Vector) -> f64 {
        self.inner.f_value(x)
    }
    fn h_value(&self, y: &Vector) -> f64 {
        self.inner.h_value(y)
    }
    fn geom_x(&self) -> BregmanGeometry {
        self.inner.geom_x()
    }
    fn geom_y(&self) -> BregmanGeometry {
        self.inner.geom_y()
    }
    fn lipschitz(&self) -> Option<LipschitzTriple> {
        self.inner.lipschitz()
    }
    fn grad_y_depends_on_y(&self) -> bool {
        self.inner.grad_y_depends_on_y()
    }
}

/// Single-threaded counting view used inside one solve.
pub(crate) struct Counted<'a> {
    pub inner: &'a dyn SaddleOracle,
    pub c: Cell<EvalCounters>,
}

impl<'a> Counted<'a> {
    pub fn new(inner: &'a dyn SaddleOracle) -> Self {
        Self { inner, c: Cell::new(EvalCounters::default()) }
    }
    fn bump(&self, f: impl FnOnce(&mut EvalCounters)) {
        let mut c = self.c.get();
        f(&mut c);
        self.c.set(c);
    }
    pub fn counters(&self) -> EvalCounters {
        self.c.get()
    }
}

impl SaddleOracle for Counted<'_> {
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
        self.bump(|c| c.phi += 1);
        self.inner.phi(x, y)
    }
    fn grad_x(&self, x: &Vector, y: &Vector) -> Vector {
        self.bump(|c| c.grad_x += 1);
        self.inner.grad_x(x, y)
    }
    fn grad_y(&self, x: &Vector, y: &Vector) -> Vector {
        self.bump(|c| c.grad_y += 1);
        self.inner.grad_y(x, y)
    }
    fn prox_f(&self, xbar: &Vector, g: &Vector, tau: f64) -> Result<Vector> {
        self.bump(|c| c.prox_f += 1);
        self.inner.prox_f(xbar, g, tau)
    }
    fn prox_h(&self, ybar: &Vector, s: &Vector, sigma: f64) -> Result<Vector> {
        self.bump(|c| c.prox_h += 1);
        self.inner.prox_h(ybar, s, sigma)
    }
    fn f_value(&self, x: &Vector) -> f64 {
        self.inner.f_value(x)
    }
    fn h_value(&self, y: &Vector) -> f64 {
        self.inner.h_value(y)
    }
    fn geom_x(&self) -> BregmanGeometry {
        self.inner.geom_x()
    }
    fn geom_y(&self) -> BregmanGeometry {
        self.inner.geom_y()
    }
    fn lipschitz(&self) -> Option<LipschitzTriple> {
        self.inner.lipschitz()
    }
    fn grad_y_depends_on_y(&self) -> bool {
        self.inner.grad_y_depends_on_y()
    }
}
