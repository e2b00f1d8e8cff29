//! Bilinear test problems: simplex matrix games and box-constrained
//! quadratic-bilinear problems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::check_dims;
use crate::linalg::{op_norm_upper, sym_norm_upper};
use crate::oracle::{LipschitzTriple, SaddleOracle};
use crate::prox::{entropy_prox_simplex, project_box, project_simplex};
use crate::{BregmanGeometry, GeometryKind, Matrix, Result, Vector, FEAS_TOL};

fn on_simplex(v: &Vector) -> bool {
    v.iter().all(|&e| e >= -FEAS_TOL) && (v.sum() - 1.0).abs() <= FEAS_TOL * v.len() as f64
}

/// `min_{x in simplex} max_{y in simplex} x'Ay`.
#[derive(Debug, Clone)]
pub struct MatrixGame {
    pub a: Matrix,
    pub geometry: BregmanGeometry,
    l_yx: f64,
}

pub fn matrix_game(a: Matrix) -> MatrixGame {
    MatrixGame::with_geometry(a, BregmanGeometry::EUCLIDEAN)
}

impl MatrixGame {
    /// Both players use `geometry`. With entropy the coupling constant is
    /// measured in the (l1, l_inf) pair, i.e. the largest entry of `|A|`.
    pub fn with_geometry(a: Matrix, geometry: BregmanGeometry) -> Self {
        let l_yx = match geometry.kind {
            GeometryKind::Euclidean => op_norm_upper(&a),
            GeometryKind::Entropy => a.amax(),
        };
        Self { a, geometry, l_yx }
    }

    /// `max_j (A'x)_j - min_i (Ay)_i`, zero exactly at equilibria.
    pub fn duality_gap(&self, x: &Vector, y: &Vector) -> f64 {
        (self.a.transpose() * x).max() - (&self.a * y).min()
    }

    /// Uniform mixed strategies.
    pub fn uniform_start(&self) -> (Vector, Vector) {
        let (n, m) = self.a.shape();
        (Vector::from_element(n, 1.0 / n as f64), Vector::from_element(m, 1.0 / m as f64))
    }

    fn prox(&self, bar: &Vector, step_dir: &Vector, t: f64) -> Result<Vector> {
        match self.geometry.kind {
            GeometryKind::Euclidean => project_simplex(&(bar + step_dir * t)),
            GeometryKind::Entropy => entropy_prox_simplex(bar, step_dir, t),
        }
    }
}

impl SaddleOracle for MatrixGame {
    fn dim_x(&self) -> usize {
        self.a.nrows()
    }
    fn dim_y(&self) -> usize {
        self.a.ncols()
    }
    fn phi(&self, x: &Vector, y: &Vector) -> f64 {
        x.dot(&(&self.a * y))
    }
    fn grad_x(&self, _x: &Vector, y: &Vector) -> Vector {
        &self.a * y
    }
    fn grad_y(&self, x: &Vector, _y: &Vector) -> Vector {
        self.a.tr_mul(x)
    }
    fn prox_f(&self, xbar: &Vector, g: &Vector, tau: f64) -> Result<Vector> {
        check_dims(self.dim_x(), xbar.len())?;
        self.prox(xbar, &-g, tau)
    }
    fn prox_h(&self, ybar: &Vector, s: &Vector, sigma: f64) -> Result<Vector> {
        check_dims(self.dim_y(), ybar.len())?;
        self.prox(ybar, s, sigma)
    }
    fn f_value(&self, x: &Vector) -> f64 {
        if on_simplex(x) {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn h_value(&self, y: &Vector) -> f64 {
        if on_simplex(y) {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn geom_x(&self) -> BregmanGeometry {
        self.geometry
    }
    fn geom_y(&self) -> BregmanGeometry {
        self.geometry
    }
    fn lipschitz(&self) -> Option<LipschitzTriple> {
        LipschitzTriple::new(0.0, self.l_yx, 0.0).ok()
    }
    fn grad_y_depends_on_y(&self) -> bool {
        false
    }
}

/// `min_{x in [-rx, rx]^n} max_{y in [-ry, ry]^m}
///  mu/2 ||x||^2 + 1/2 x'Qx + c'x + <Kx, y> - d'y`.
///
/// The `mu` term belongs to `f`; `Phi` is the rest.
#[derive(Debug, Clone)]
pub struct BilinearBox {
    pub q: Matrix,
    pub c: Vector,
    pub k: Matrix,
    pub d: Vector,
    pub rx: f64,
    pub ry: f64,
    pub mu: f64,
    l_q: f64,
    l_k: f64,
}

impl BilinearBox {
    pub fn new(q: Matrix, c: Vector, k: Matrix, d: Vector, rx: f64, ry: f64, mu: f64) -> Result<Self> {
        check_dims(q.nrows(), c.len())?;
        check_dims(k.ncols(), c.len())?;
        check_dims(k.nrows(), d.len())?;
        let l_q = if q.iter().all(|&v| v == 0.0) { 0.0 } else { sym_norm_upper(&q) };
        let l_k = op_norm_upper(&k);
        Ok(Self { q, c, k, d, rx, ry, mu, l_q, l_k })
    }

    /// Random instance: `Q = B'B / n`, Gaussian `c`, `K`, `d`, boxes of radius 1.
    pub fn random(n: usize, m: usize, seed: u64, mu: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gauss = |r: usize, c: usize| Matrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal));
        let b = gauss(n, n);
        let q = b.tr_mul(&b) / n as f64;
        let k = gauss(m, n);
        let c = gauss(n, 1).column(0).into_owned();
        let d = gauss(m, 1).column(0).into_owned();
        Self::new(q, c, k, d, 1.0, 1.0, mu).expect("consistent shapes")
    }

    pub fn l_q(&self) -> f64 {
        self.l_q
    }
    pub fn l_k(&self) -> f64 {
        self.l_k
    }
}

impl SaddleOracle for BilinearBox {
    fn dim_x(&self) -> usize {
        self.c.len()
    }
    fn dim_y(&self) -> usize {
        self.d.len()
    }
    fn mu(&self) -> f64 {
        self.mu
    }
    fn phi(&self, x: &Vector, y: &Vector) -> f64 {
        0.5 * x.dot(&(&self.q * x)) + self.c.dot(x) + y.dot(&(&self.k * x)) - self.d.dot(y)
    }
    fn grad_x(&self, x: &Vector, y: &Vector) -> Vector {
        &self.q * x + &self.c + self.k.tr_mul(y)
    }
    fn grad_y(&self, x: &Vector, _y: &Vector) -> Vector {
        &self.k * x - &self.d
    }
    fn prox_f(&self, xbar: &Vector, g: &Vector, tau: f64) -> Result<Vector> {
        check_dims(self.dim_x(), xbar.len())?;
        project_box(&((xbar - g * tau) / (1.0 + self.mu * tau)), -self.rx, self.rx)
    }
    fn prox_h(&self, ybar: &Vector, s: &Vector, sigma: f64) -> Result<Vector> {
        check_dims(self.dim_y(), ybar.len())?;
        project_box(&(ybar + s * sigma), -self.ry, self.ry)
    }
    fn f_value(&self, x: &Vector) -> f64 {
        if x.iter().any(|v| v.abs() > self.rx * (1.0 + FEAS_TOL)) {
            f64::INFINITY
        } else {
            0.5 * self.mu * x.norm_squared()
        }
    }
    fn h_value(&self, y: &Vector) -> f64 {
        if y.iter().any(|v| v.abs() > self.ry * (1.0 + FEAS_TOL)) {
            f64::INFINITY
        } else {
            0.0
        }
    }
    fn lipschitz(&self) -> Option<LipschitzTriple> {
        LipschitzTriple::new(self.l_q, self.l_k, 0.0).ok()
    }
    fn grad_y_depends_on_y(&self) -> bool {
        false
    }
}
