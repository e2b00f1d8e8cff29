//! Multiple-kernel SVM as a saddle problem over (support weights, kernel
//! simplex).
//!
//! `Phi(x, y) = -2 e'x + sum_l w_l y_l x'G_l x` with `G_l = diag(b) K_l diag(b)`
//! and `w_l = c / r_l`. For the l2 variant the `lambda ||x||^2` term is kept in
//! `f`, so `f` is `2 lambda`-strongly convex and `Phi` stays the same for both
//! variants.

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::check_dims;
use crate::linalg::sym_norm_upper;
use crate::oracle::{LipschitzTriple, SaddleOracle};
use crate::prox::{entropy_prox_simplex, project_box_hyperplane, project_simplex};
use crate::zoo::data::Dataset;
use crate::{BregmanGeometry, Error, GeometryKind, Matrix, Result, Vector, FEAS_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `(offset + a'b)^degree`
    Polynomial { degree: i32, offset: f64 },
    /// `exp(-0.5 ||a - b||^2 / bandwidth)`
    Gaussian { bandwidth: f64 },
    Linear,
}

impl KernelSpec {
    /// Quadratic, Gaussian (bandwidth 0.1) and linear kernels.
    pub fn standard_set() -> Vec<KernelSpec> {
        vec![
            KernelSpec::Polynomial { degree: 2, offset: 1.0 },
            KernelSpec::Gaussian { bandwidth: 0.1 },
            KernelSpec::Linear,
        ]
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(u, v)| u * v).sum();
        match *self {
            KernelSpec::Polynomial { degree, offset } => (offset + dot).powi(degree),
            KernelSpec::Gaussian { bandwidth } => {
                let d2: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
                (-0.5 * d2 / bandwidth).exp()
            }
            KernelSpec::Linear => dot,
        }
    }
}

/// Gram matrix of `kernel` over all rows of `data`, without normalization.
pub fn gram_raw(data: &Dataset, kernel: &KernelSpec) -> Matrix {
    let n = data.len();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| data.features.row(i).iter().copied().collect()).collect();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(&rows[i], &rows[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Normalized Gram matrices `K_ij / sqrt(K_ii K_jj)`, one per kernel, over
/// every row of `data` (training and test points together).
pub fn build_kernel_matrices(data: &Dataset, kernels: &[KernelSpec]) -> Result<Vec<Matrix>> {
    kernels
        .iter()
        .map(|kern| {
            let k = gram_raw(data, kern);
            let d = k.diagonal();
            if let Some(i) = d.iter().position(|&v| !(v > 0.0)) {
                return Err(Error::Domain(format!("kernel {kern:?} has a nonpositive diagonal entry at point {i}")));
            }
            let s = d.map(|v| 1.0 / v.sqrt());
            let mut out = Matrix::from_fn(k.nrows(), k.ncols(), |i, j| k[(i, j)] * s[i] * s[j]);
            out.fill_diagonal(1.0);
            Ok(out)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SvmVariant {
    /// Box `0 <= x <= C`, no quadratic regularizer.
    L1,
    /// Orthant `x >= 0` with `lambda ||x||^2`.
    L2,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelSvmInstance {
    /// Training blocks of the normalized kernels.
    pub k_tr: Vec<Matrix>,
    pub labels: Vector,
    pub variant: SvmVariant,
    pub c: Option<f64>,
    pub lambda: f64,
    /// `c = sum_l r_l`.
    pub c_trace: f64,
    /// Traces of the full (training and test) kernels.
    pub r: Vec<f64>,
}

impl KernelSvmInstance {
    /// Build from full kernel matrices; `train` indexes the training points
    /// and `labels` are their labels.
    pub fn new(k_full: &[Matrix], train: &[usize], labels: Vector, variant: SvmVariant, c: Option<f64>, lambda: f64) -> Result<Self> {
        check_dims(train.len(), labels.len())?;
        if k_full.is_empty() {
            return Err(Error::Domain("at least one kernel is required".into()));
        }
        let r: Vec<f64> = k_full.iter().map(|k| k.trace()).collect();
        let k_tr = k_full.iter().map(|k| k.select_rows(train).select_columns(train)).collect();
        let inst = Self { k_tr, labels, variant, c, lambda, c_trace: r.iter().sum(), r };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        match self.variant {
            SvmVariant::L1 => {
                if self.lambda != 0.0 {
                    return Err(Error::Config(format!("l1 variant takes lambda = 0, got {}", self.lambda)));
                }
                match self.c {
                    Some(c) if c > 0.0 && c.is_finite() => {}
                    _ => return Err(Error::Config("l1 variant needs a finite C > 0".into())),
                }
            }
            SvmVariant::L2 => {
                if !(self.lambda > 0.0) {
                    return Err(Error::Config(format!("l2 variant needs lambda > 0, got {}", self.lambda)));
                }
                if self.c.is_some_and(|c| c.is_finite()) {
                    return Err(Error::Config("l2 variant takes C = infinity".into()));
                }
            }
        }
        if self.labels.iter().any(|&l| l != 1.0 && l != -1.0) {
            return Err(Error::Domain("labels must be -1 or +1".into()));
        }
        if self.r.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::Domain("kernel traces must be positive".into()));
        }
        for k in &self.k_tr {
            check_dims(self.labels.len(), k.nrows())?;
        }
        Ok(())
    }

    pub fn n_train(&self) -> usize {
        self.labels.len()
    }

    pub fn n_kernels(&self) -> usize {
        self.k_tr.len()
    }

    /// `w_l = c / r_l`.
    pub fn weights(&self) -> Vec<f64> {
        self.r.iter().map(|r| self.c_trace / r).collect()
    }

    /// `diag(b) K_l diag(b)`.
    pub fn g_matrices(&self) -> Vec<Matrix> {
        let b = &self.labels;
        self.k_tr.iter().map(|k| Matrix::from_fn(k.nrows(), k.ncols(), |i, j| b[i] * k[(i, j)] * b[j])).collect()
    }

    /// Radius of a ball holding the optimal `x`: `C sqrt(n)` for the box, and
    /// `2 sqrt(n) / lambda` for the l2 variant.
    pub fn primal_radius(&self) -> f64 {
        let sn = (self.n_train() as f64).sqrt();
        match self.variant {
            SvmVariant::L1 => self.c.unwrap_or(f64::INFINITY) * sn,
            SvmVariant::L2 => 2.0 * sn / self.lambda,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SvmSaddle {
    pub labels: Vector,
    pub variant: SvmVariant,
    pub c: f64,
    pub lambda: f64,
    pub geometry: BregmanGeometry,
    /// `w_l G_l` stacked vertically, one `n x n` block per kernel.
    stacked: Matrix,
    n_kernels: usize,
    lip: LipschitzTriple,
    cache: ProductCache,
}

/// The last `x` with its stacked product: the gradient calls of one
/// iteration share the same point.
#[derive(Debug, Default)]
struct ProductCache(Mutex<Option<(Vector, Vector)>>);

impl Clone for ProductCache {
    fn clone(&self) -> Self {
        Self::default()
    }
}

/// Saddle oracle with a Euclidean kernel-weight geometry.
pub fn build_svm_saddle(inst: &KernelSvmInstance) -> Result<SvmSaddle> {
    build_svm_saddle_with(inst, BregmanGeometry::EUCLIDEAN)
}

pub fn build_svm_saddle_with(inst: &KernelSvmInstance, geometry: BregmanGeometry) -> Result<SvmSaddle> {
    inst.validate()?;
    let w = inst.weights();
    let wg: Vec<Matrix> = inst.g_matrices().into_iter().zip(&w).map(|(g, wl)| g * *wl).collect();
    let top = wg.iter().map(sym_norm_upper).fold(0.0, f64::max);
    let radius = inst.primal_radius();
    let l_xx = 2.0 * top;
    let l_yx = match geometry.kind {
        GeometryKind::Euclidean => 2.0 * (inst.n_kernels() as f64).sqrt() * radius * top,
        GeometryKind::Entropy => 2.0 * radius * top,
    };
    let lip = LipschitzTriple::new(l_xx, l_yx, 0.0)?;
    let n = inst.n_train();
    let mut stacked = Matrix::zeros(n * wg.len(), n);
    for (l, g) in wg.iter().enumerate() {
        stacked.view_mut((l * n, 0), (n, n)).copy_from(g);
    }
    Ok(SvmSaddle {
        labels: inst.labels.clone(),
        variant: inst.variant,
        c: inst.c.unwrap_or(f64::INFINITY),
        lambda: inst.lambda,
        geometry,
        stacked,
        n_kernels: wg.len(),
        lip,
        cache: ProductCache::default(),
    })
}

impl SvmSaddle {
    /// `x0 = 0`, `y0` uniform.
    pub fn default_start(&self) -> (Vector, Vector) {
        let m = self.n_kernels;
        (Vector::zeros(self.labels.len()), Vector::from_element(m, 1.0 / m as f64))
    }

    /// `(w_l G_l x)_l` stacked.
    fn products(&self, x: &Vector) -> Vector {
        let mut last = self.cache.0.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((cx, p)) = last.as_ref() {
            if cx == x {
                return p.clone();
            }
        }
        let p = &self.stacked * x;
        *last = Some((x.clone(), p.clone()));
        p
    }

    fn block<'a>(&self, p: &'a Vector, l: usize) -> nalgebra::DVectorView<'a, f64> {
        let n = self.labels.len();
        p.rows(l * n, n)
    }

    fn in_x(&self, x: &Vector) -> bool {
        let tol = FEAS_TOL * (1.0 + x.amax());
        x.iter().all(|&v| v >= -tol && v <= self.c + tol) && self.labels.dot(x).abs() <= tol * x.len() as f64
    }
}

impl SaddleOracle for SvmSaddle {
    fn dim_x(&self) -> usize {
        self.labels.len()
    }
    fn dim_y(&self) -> usize {
        self.n_kernels
    }
    fn mu(&self) -> f64 {
        2.0 * self.lambda
    }
    fn phi(&self, x: &Vector, y: &Vector) -> f64 {
        let p = self.products(x);
        let quad: f64 = y.iter().enumerate().map(|(l, yl)| yl * x.dot(&self.block(&p, l))).sum();
        -2.0 * x.sum() + quad
    }
    fn grad_x(&self, x: &Vector, y: &Vector) -> Vector {
        let p = self.products(x);
        let mut out = Vector::from_element(x.len(), -2.0);
        for (l, yl) in y.iter().enumerate() {
            if *yl != 0.0 {
                out.axpy(2.0 * yl, &self.block(&p, l), 1.0);
            }
        }
        out
    }
    fn grad_y(&self, x: &Vector, _y: &Vector) -> Vector {
        let p = self.products(x);
        Vector::from_iterator(self.n_kernels, (0..self.n_kernels).map(|l| x.dot(&self.block(&p, l))))
    }
    fn prox_f(&self, xbar: &Vector, g: &Vector, tau: f64) -> Result<Vector> {
        check_dims(self.dim_x(), xbar.len())?;
        let v = (xbar - g * tau) / (1.0 + 2.0 * self.lambda * tau);
        project_box_hyperplane(&v, self.c, &self.labels)
    }
    fn prox_h(&self, ybar: &Vector, s: &Vector, sigma: f64) -> Result<Vector> {
        check_dims(self.dim_y(), ybar.len())?;
        match self.geometry.kind {
            GeometryKind::Euclidean => project_simplex(&(ybar + s * sigma)),
            GeometryKind::Entropy => entropy_prox_simplex(ybar, s, sigma),
        }
    }
    fn f_value(&self, x: &Vector) -> f64 {
        if self.in_x(x) {
            self.lambda * x.norm_squared()
        } else {
            f64::INFINITY
        }
    }
    fn h_value(&self, y: &Vector) -> f64 {
        let ok = y.iter().all(|&v| v >= -FEAS_TOL) && (y.sum() - 1.0).abs() <= FEAS_TOL * y.len() as f64;
        if ok {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn geom_y(&self) -> BregmanGeometry {
        self.geometry
    }
    fn lipschitz(&self) -> Option<LipschitzTriple> {
        Some(self.lip)
    }
    fn grad_y_depends_on_y(&self) -> bool {
        false
    }
}

/// Labels of the `test` points and the intercept, from support weights
/// `alpha` and kernel weights `y`. The intercept is the median over every
/// admissible support index.
pub fn predict_labels(
    inst: &KernelSvmInstance,
    alpha: &Vector,
    y: &Vector,
    k_full: &[Matrix],
    train: &[usize],
    test: &[usize],
) -> Result<(Vector, f64)> {
    check_dims(inst.n_train(), alpha.len())?;
    check_dims(inst.n_train(), train.len())?;
    check_dims(inst.n_kernels(), y.len())?;
    check_dims(inst.n_kernels(), k_full.len())?;
    let b = &inst.labels;
    // eta_l = c y_l / r_l
    let eta: Vec<f64> = y.iter().zip(&inst.r).map(|(yl, rl)| inst.c_trace * yl / rl).collect();
    let kstar = |i: usize, j: usize| -> f64 { k_full.iter().zip(&eta).map(|(k, e)| e * k[(i, j)]).sum() };
    let score = |col: usize| -> f64 { train.iter().enumerate().map(|(p, &j)| b[p] * alpha[p] * kstar(j, col)).sum() };
    let band = 1e-6;
    let c = inst.c.unwrap_or(f64::INFINITY);
    let mut cands: Vec<f64> = (0..inst.n_train())
        .filter(|&p| match inst.variant {
            SvmVariant::L1 => alpha[p] > band && alpha[p] < c - band,
            SvmVariant::L2 => alpha[p] > band,
        })
        .map(|p| {
            let base = match inst.variant {
                SvmVariant::L1 => b[p],
                SvmVariant::L2 => b[p] * (1.0 - inst.lambda * alpha[p]),
            };
            base - score(train[p])
        })
        .collect();
    if cands.is_empty() {
        return Err(Error::Domain("no support vector strictly inside the bounds; try a larger C or smaller lambda".into()));
    }
    cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = cands.len();
    let gamma = if k % 2 == 1 { cands[k / 2] } else { 0.5 * (cands[k / 2 - 1] + cands[k / 2]) };
    let labels = Vector::from_iterator(test.len(), test.iter().map(|&i| if score(i) + gamma >= 0.0 { 1.0 } else { -1.0 }));
    Ok((labels, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_intercept() {
        let k = vec![Matrix::from_element(2, 2, 1.0)];
        let inst = KernelSvmInstance::new(&k, &[0], Vector::from_element(1, 1.0), SvmVariant::L1, Some(2.0), 0.0).unwrap();
        let (lab, g) = predict_labels(&inst, &Vector::from_element(1, 1.0), &Vector::from_element(1, 1.0), &k, &[0], &[1]).unwrap();
        // c / r = 1 here since M = 1
        assert!(g.abs() < 1e-15);
        assert_eq!(lab[0], 1.0);
    }

    #[test]
    fn variant_mismatch_rejected() {
        let k = vec![Matrix::identity(2, 2)];
        let lab = Vector::from_vec(vec![1.0, -1.0]);
        assert!(KernelSvmInstance::new(&k, &[0, 1], lab.clone(), SvmVariant::L1, Some(1.0), 0.5).is_err());
        assert!(KernelSvmInstance::new(&k, &[0, 1], lab, SvmVariant::L2, Some(1.0), 1.0).is_err());
    }
}
