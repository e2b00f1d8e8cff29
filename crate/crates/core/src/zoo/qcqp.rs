//! Random convex QCQPs over a box:
//! `min 1/2 x'A0x + b0'x  s.t.  1/2 x'Ajx + bj'x - cj <= 0,  x in [-R, R]^n`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::conic::{dual_bound_slater, ConeSpec, ConicProblem};
use crate::linalg::sym_norm_upper;
use crate::{Error, Matrix, Result, Vector, FEAS_TOL};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QcqpInstance {
    /// `a[0]` is the objective matrix, `a[1..=m]` the constraints.
    pub a: Vec<Matrix>,
    pub b: Vec<Vector>,
    pub c: Vec<f64>,
    pub box_radius: f64,
    pub strongly_convex: bool,
    pub seed: u64,
    /// Lower bound on the smallest eigenvalue of `a[0]`.
    pub mu: f64,
}

impl QcqpInstance {
    pub fn n(&self) -> usize {
        self.b[0].len()
    }
    pub fn m(&self) -> usize {
        self.c.len()
    }
    pub fn objective(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.a[0] * x)) + self.b[0].dot(x)
    }
    pub fn constraint_values(&self, x: &Vector) -> Vector {
        Vector::from_iterator(
            self.m(),
            (1..=self.m()).map(|j| 0.5 * x.dot(&(&self.a[j] * x)) + self.b[j].dot(x) - self.c[j - 1]),
        )
    }
}

fn random_orthonormal(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    g.qr().q()
}

fn spectrum(n: usize, lo: f64, hi: f64, force_zero_min: bool, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut s: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    if force_zero_min {
        let (imin, _) = s.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        s[imin] = 0.0;
    }
    s
}

/// Deterministic instance: `A_j = L' S L` with `L` an orthonormalized
/// Gaussian matrix; spectra uniform on `[0, 100]` with the minimum forced to
/// 0, except the strongly convex objective whose spectrum is uniform on
/// `[1, 101]`; `b` standard Gaussian, `c` uniform on `[0, 1]`, box radius 10.
pub fn gen_qcqp(n: usize, m: usize, seed: u64, strongly_convex: bool) -> Result<QcqpInstance> {
    if n < 2 || m < 1 {
        return Err(Error::Domain(format!("QCQP needs n >= 2 and m >= 1, got n={n}, m={m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Vec::with_capacity(m + 1);
    let mut b = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let l = random_orthonormal(n, &mut rng);
        let s = if j == 0 && strongly_convex { spectrum(n, 1.0, 101.0, false, &mut rng) } else { spectrum(n, 0.0, 100.0, true, &mut rng) };
        let mut aj = l.transpose() * Matrix::from_diagonal(&Vector::from_vec(s)) * &l;
        aj = (&aj + aj.transpose()) * 0.5;
        a.push(aj);
        b.push(Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal)));
    }
    let c: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
    Ok(QcqpInstance { a, b, c, box_radius: 10.0, strongly_convex, seed, mu: if strongly_convex { 1.0 } else { 0.0 } })
}

/// Conic view of a QCQP. The `mu/2 ||x||^2` part of the objective is moved
/// into `f` (together with the box indicator) so that `f` carries the
/// strong-convexity modulus; `g` keeps the rest.
#[derive(Debug, Clone)]
pub struct QcqpConic {
    pub inst: Arc<QcqpInstance>,
    pub mu: f64,
    a0_shift: Matrix,
    l_g: f64,
    c_g: f64,
    l_jac: f64,
    norms: Vec<f64>,
    cone: ConeSpec,
}

pub fn qcqp_to_conic(inst: QcqpInstance) -> QcqpConic {
    qcqp_to_conic_with_mu(inst.clone(), inst.mu)
}

/// As [`qcqp_to_conic`] with an explicit modulus `mu <= lambda_min(A0)`.
pub fn qcqp_to_conic_with_mu(inst: QcqpInstance, mu: f64) -> QcqpConic {
    let n = inst.n();
    let a0_shift = &inst.a[0] - Matrix::identity(n, n) * mu;
    let l_g = sym_norm_upper(&a0_shift);
    let norms: Vec<f64> = inst.a.iter().map(sym_norm_upper).collect();
    let r = inst.box_radius * (n as f64).sqrt();
    // ||G(x) - G(x')|| <= sqrt(sum_j sup ||grad G_j||^2) ||x - x'||
    let c_g = (1..=inst.m()).map(|j| (norms[j] * r + inst.b[j].norm()).powi(2)).sum::<f64>().sqrt();
    let l_jac = norms[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    QcqpConic { inst: Arc::new(inst), mu, a0_shift, l_g, c_g, l_jac, norms, cone: ConeSpec::NonnegOrthant }
}

impl QcqpConic {
    /// Upper bounds on the spectral norms of `A_0, ..., A_m`.
    pub fn matrix_norms(&self) -> &[f64] {
        &self.norms
    }
}

impl ConicProblem for QcqpConic {
    fn dim_x(&self) -> usize {
        self.inst.n()
    }
    fn dim_y(&self) -> usize {
        self.inst.m()
    }
    fn prox_f(&self, xbar: &Vector, g: &Vector, tau: f64) -> Result<Vector> {
        let r = self.inst.box_radius;
        let scale = 1.0 / (1.0 + self.mu * tau);
        Ok(Vector::from_iterator(xbar.len(), xbar.iter().zip(g.iter()).map(|(x, gi)| ((x - tau * gi) * scale).clamp(-r, r))))
    }
    fn f_value(&self, x: &Vector) -> f64 {
        let r = self.inst.box_radius * (1.0 + FEAS_TOL);
        if x.iter().any(|v| v.abs() > r) {
            f64::INFINITY
        } else {
            0.5 * self.mu * x.norm_squared()
        }
    }
    fn g_value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.a0_shift * x)) + self.inst.b[0].dot(x)
    }
    fn g_grad(&self, x: &Vector) -> Vector {
        &self.a0_shift * x + &self.inst.b[0]
    }
    fn constraint(&self, x: &Vector) -> Vector {
        self.inst.constraint_values(x)
    }
    fn jacobian_t_apply(&self, x: &Vector, y: &Vector) -> Vector {
        let mut out = Vector::zeros(x.len());
        for j in 1..=self.inst.m() {
            let yj = y[j - 1];
            if yj != 0.0 {
                out += (&self.inst.a[j] * x + &self.inst.b[j]) * yj;
            }
        }
        out
    }
    fn cone(&self) -> &ConeSpec {
        &self.cone
    }
    fn l_g(&self) -> f64 {
        self.l_g
    }
    fn c_g(&self) -> Option<f64> {
        Some(self.c_g)
    }
    fn l_jac(&self) -> Option<f64> {
        Some(self.l_jac)
    }
    fn mu(&self) -> f64 {
        self.mu
    }
}

/// Certified lower bound on `min_{x in [-r, r]^n} 1/2 x'Ax + b'x` for PSD `A`:
/// accelerated projected gradient followed by the linearization bound
/// `q(x) + min_{u in box} <grad q(x), u - x>`, valid by convexity.
pub fn box_qp_lower_bound(a: &Matrix, b: &Vector, r: f64, iters: usize) -> (f64, Vector) {
    let n = b.len();
    let l = sym_norm_upper(a).max(1e-12);
    let mut x = Vector::zeros(n);
    let mut z = x.clone();
    let mut t = 1.0_f64;
    for _ in 0..iters {
        let g = a * &z + b;
        let xn = (&z - g / l).map(|v| v.clamp(-r, r));
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = &xn + (&xn - &x) * ((t - 1.0) / tn);
        x = xn;
        t = tn;
    }
    let g = a * &x + b;
    let lin: f64 = g.iter().zip(x.iter()).map(|(gi, xi)| (gi * (-r - xi)).min(gi * (r - xi))).sum();
    (0.5 * x.dot(&(a * &x)) + b.dot(&x) + lin, x)
}

/// Lower bound on the optimal objective from the box-constrained problem alone.
pub fn objective_lower_bound(inst: &QcqpInstance, iters: usize) -> (f64, Vector) {
    box_qp_lower_bound(&inst.a[0], &inst.b[0], inst.box_radius, iters)
}

/// Certified lower bound on the Lagrangian dual function
/// `q(y) = min_{x in box} rho(x) + <y, G(x)>` at `y >= 0`; by weak duality
/// it also bounds the optimal objective from below.
pub fn lagrangian_dual_bound(inst: &QcqpInstance, y: &Vector, iters: usize) -> Result<f64> {
    if y.len() != inst.m() {
        return Err(Error::DimensionMismatch { expected: inst.m(), got: y.len() });
    }
    if y.iter().any(|&v| v < 0.0) {
        return Err(Error::Domain("dual point must be nonnegative".into()));
    }
    let mut a = inst.a[0].clone();
    let mut b = inst.b[0].clone();
    let mut shift = 0.0;
    for j in 1..=inst.m() {
        a += &inst.a[j] * y[j - 1];
        b += &inst.b[j] * y[j - 1];
        shift -= inst.c[j - 1] * y[j - 1];
    }
    Ok(box_qp_lower_bound(&a, &b, inst.box_radius, iters).0 + shift)
}

/// Slater point, lower bound and the resulting dual bound.
#[derive(Debug, Clone)]
pub struct SlaterBound {
    pub x: Vector,
    pub q_lower: f64,
    pub bound: f64,
}

/// Dual bound from the best strictly feasible point among `0` and scalings
/// of the box-constrained minimizer of the objective.
pub fn qcqp_slater_bound(p: &QcqpConic) -> Result<SlaterBound> {
    let (q_lower, x_unc) = objective_lower_bound(&p.inst, 5_000);
    let mut best: Option<SlaterBound> = None;
    for i in 0..=20 {
        let x = &x_unc * (i as f64 / 20.0);
        if let Ok(bound) = dual_bound_slater(p, &x, q_lower) {
            if best.as_ref().is_none_or(|b| bound < b.bound) {
                best = Some(SlaterBound { x, q_lower, bound });
            }
        }
    }
    best.ok_or_else(|| Error::Domain("no strictly feasible candidate found for the dual bound".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_psd() {
        let a = gen_qcqp(6, 2, 7, false).unwrap();
        let b = gen_qcqp(6, 2, 7, false).unwrap();
        assert_eq!(a.a, b.a);
        assert_eq!(a.c, b.c);
        for m in &a.a {
            let e = m.clone().symmetric_eigen().eigenvalues;
            assert!(e.min() > -1e-8);
        }
    }
}
