//! Conic programs `min f(x) + g(x)  s.t.  G(x) in -K` as saddle problems
//! with `Phi(x, y) = g(x) + <G(x), y>` and `h` the indicator of `K*`.

use std::sync::Arc;

use crate::error::check_dims;
use crate::oracle::{LipschitzTriple, SaddleOracle};
use crate::{Error, Result, Vector, FEAS_TOL};

type Projector = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// The cone `K`, described by projections onto `K*` and `-K`.
#[derive(Clone)]
pub enum ConeSpec {
    NonnegOrthant,
    Custom { project_dual: Projector, project_minus: Projector },
}

impl std::fmt::Debug for ConeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NonnegOrthant => write!(f, "NonnegOrthant"),
            Self::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl ConeSpec {
    pub fn project_dual(&self, v: &Vector) -> Vector {
        match self {
            Self::NonnegOrthant => v.map(|e| e.max(0.0)),
            Self::Custom { project_dual, .. } => project_dual(v),
        }
    }

    pub fn project_minus(&self, v: &Vector) -> Vector {
        match self {
            Self::NonnegOrthant => v.map(|e| e.min(0.0)),
            Self::Custom { project_minus, .. } => project_minus(v),
        }
    }

    pub fn in_dual(&self, y: &Vector) -> bool {
        match self {
            Self::NonnegOrthant => y.iter().all(|&e| e >= -FEAS_TOL),
            Self::Custom { project_dual, .. } => (project_dual(y) - y).norm() <= FEAS_TOL * (1.0 + y.norm()),
        }
    }
}

/// Projection onto the second-order cone `{(t, u) : ||u|| <= t}` with `t`
/// the first coordinate.
pub fn project_soc(v: &Vector) -> Vector {
    if v.is_empty() {
        return v.clone();
    }
    let t = v[0];
    let u = v.rows(1, v.len() - 1);
    let nu = u.norm();
    if nu <= t {
        return v.clone();
    }
    if nu <= -t {
        return Vector::zeros(v.len());
    }
    let a = 0.5 * (t + nu);
    let mut out = Vector::zeros(v.len());
    out[0] = a;
    out.rows_mut(1, v.len() - 1).copy_from(&(u * (a / nu)));
    out
}

impl ConeSpec {
    /// The self-dual second-order cone.
    pub fn second_order() -> Self {
        Self::Custom { project_dual: Arc::new(project_soc), project_minus: Arc::new(|v: &Vector| -project_soc(&-v)) }
    }
}

/// Data of a conic program. `G` must be K-convex; the Jacobian is only
/// accessed through transpose products.
pub trait ConicProblem: Send + Sync {
    fn dim_x(&self) -> usize;
    /// Number of constraint components.
    fn dim_y(&self) -> usize;
    /// `argmin f(x) + <g, x> + ||x - xbar||^2 / (2 tau)`.
    fn prox_f(&self, xbar: &Vector, g: &Vector, tau: f64) -> Result<Vector>;
    /// `f(x)`, `+inf` outside its domain.
    fn f_value(&self, x: &Vector) -> f64;
    fn g_value(&self, x: &Vector) -> f64;
    fn g_grad(&self, x: &Vector) -> Vector;
    fn constraint(&self, x: &Vector) -> Vector;
    /// `grad G(x)^T y`.
    fn jacobian_t_apply(&self, x: &Vector, y: &Vector) -> Vector;
    fn cone(&self) -> &ConeSpec;
    /// Lipschitz constant of `grad g`.
    fn l_g(&self) -> f64;
    /// Lipschitz constant of `G` on `dom f`.
    fn c_g(&self) -> Option<f64>;
    /// Lipschitz constant of `grad G` on `dom f`.
    fn l_jac(&self) -> Option<f64>;
    fn mu(&self) -> f64 {
        0.0
    }
    /// Objective `rho = f + g`.
    fn rho(&self, x: &Vector) -> f64 {
        self.f_value(x) + self.g_value(x)
    }
}

impl<P: ConicProblem + ?Sized> ConicProblem for Arc<P> {
    fn dim_x(&self) -> usize {
        (**self).dim_x()
    }
    fn dim_y(&self) -> usize {
        (**self).dim_y()
    }
    fn prox_f(&self, xbar: &Vector, g: &Vector, tau: f64) -> Result<Vector> {
        (**self).prox_f(xbar, g, tau)
    }
    fn f_value(&self, x: &Vector) -> f64 {
        (**self).f_value(x)
    }
    fn g_value(&self, x: &Vector) -> f64 {
        (**self).g_value(x)
    }
    fn g_grad(&self, x: &Vector) -> Vector {
        (**self).g_grad(x)
    }
    fn constraint(&self, x: &Vector) -> Vector {
        (**self).constraint(x)
    }
    fn jacobian_t_apply(&self, x: &Vector, y: &Vector) -> Vector {
        (**self).jacobian_t_apply(x, y)
    }
    fn cone(&self) -> &ConeSpec {
        (**self).cone()
    }
    fn l_g(&self) -> f64 {
        (**self).l_g()
    }
    fn c_g(&self) -> Option<f64> {
        (**self).c_g()
    }
    fn l_jac(&self) -> Option<f64> {
        (**self).l_jac()
    }
    fn mu(&self) -> f64 {
        (**self).mu()
    }
}

/// Saddle oracle of a conic program, optionally with the dual domain capped
/// at radius `B + kappa`.
pub struct ConicSaddle<P> {
    pub problem: P,
    pub dual_cap: Option<f64>,
}

/// Build the saddle oracle; `dual_bound` and `kappa` together cap the dual.
pub fn build_saddle_from_conic<P: ConicProblem>(
    p: P,
    dual_bound: Option<f64>,
    kappa: Option<f64>,
) -> Result<ConicSaddle<P>> {
    let dual_cap = match (dual_bound, kappa) {
        (None, _) => None,
        (Some(b), k) => {
            let k = k.unwrap_or(b);
            if !(b > 0.0) || !(k > 0.0) {
                return Err(Error::Domain(format!("dual cap needs B > 0 and kappa > 0, got {b}, {k}")));
            }
            Some(b + k)
        }
    };
    Ok(ConicSaddle { problem: p, dual_cap })
}

impl<P: ConicProblem> SaddleOracle for ConicSaddle<P> {
    fn dim_x(&self) -> usize {
        self.problem.dim_x()
    }
    fn dim_y(&self) -> usize {
        self.problem.dim_y()
    }
    fn mu(&self) -> f64 {
        self.problem.mu()
    }
    fn phi(&self, x: &Vector, y: &Vector) -> f64 {
        self.problem.g_value(x) + self.problem.constraint(x).dot(y)
    }
    fn grad_x(&self, x: &Vector, y: &Vector) -> Vector {
        self.problem.g_grad(x) + self.problem.jacobian_t_apply(x, y)
    }
    fn grad_y(&self, x: &Vector, _y: &Vector) -> Vector {
        self.problem.constraint(x)
    }
    fn prox_f(&self, xbar: &Vector, g: &Vector, tau: f64) -> Result<Vector> {
        self.problem.prox_f(xbar, g, tau)
    }
    fn prox_h(&self, ybar: &Vector, s: &Vector, sigma: f64) -> Result<Vector> {
        check_dims(self.dim_y(), ybar.len())?;
        let mut y = self.problem.cone().project_dual(&(ybar + s * sigma));
        if let Some(r) = self.dual_cap {
            // radial scaling is exact for a closed convex cone intersected
            // with a centered ball
            let n = y.norm();
            if n > r {
                y *= r / n;
            }
        }
        Ok(y)
    }
    fn f_value(&self, x: &Vector) -> f64 {
        self.problem.f_value(x)
    }
    fn h_value(&self, y: &Vector) -> f64 {
        if !self.problem.cone().in_dual(y) {
            return f64::INFINITY;
        }
        if let Some(r) = self.dual_cap {
            if y.norm() > r * (1.0 + FEAS_TOL) {
                return f64::INFINITY;
            }
        }
        0.0
    }
    fn lipschitz(&self) -> Option<LipschitzTriple> {
        let c_g = self.problem.c_g()?;
        let cap = self.dual_cap?;
        let l_jac = self.problem.l_jac()?;
        LipschitzTriple::new(self.problem.l_g() + cap * l_jac, c_g, 0.0).ok()
    }
    fn grad_y_depends_on_y(&self) -> bool {
        false
    }
}

/// `d_{-K}(w) = ||w - P_{-K}(w)||`.
pub fn distance_to_minus_cone(w: &Vector, cone: &ConeSpec) -> f64 {
    match cone {
        ConeSpec::NonnegOrthant => w.map(|e| e.max(0.0)).norm(),
        _ => (w - cone.project_minus(w)).norm(),
    }
}

/// `min { -<G(x), w> : ||w||_1 = 1, w in K* }`; closed form `min_j -G_j(x)`
/// for the orthant.
pub fn r_tilde<P: ConicProblem + ?Sized>(p: &P, x_slater: &Vector) -> Result<f64> {
    match p.cone() {
        ConeSpec::NonnegOrthant => {
            let g = p.constraint(x_slater);
            let r = g.iter().map(|v| -v).fold(f64::INFINITY, f64::min);
            if !(r >= 1e-8) {
                return Err(Error::Domain(format!("point is not strictly feasible (margin {r:e})")));
            }
            Ok(r)
        }
        ConeSpec::Custom { .. } => Err(Error::Unsupported("Slater margin for custom cones".into())),
    }
}

/// `B = (rho(x_slater) - q_lower) / r_tilde`, a bound on every dual optimum.
pub fn dual_bound_slater<P: ConicProblem + ?Sized>(p: &P, x_slater: &Vector, q_lower: f64) -> Result<f64> {
    let r = r_tilde(p, x_slater)?;
    let rho = p.rho(x_slater);
    if !rho.is_finite() {
        return Err(Error::Domain("Slater point outside dom f".into()));
    }
    if rho < q_lower {
        return Err(Error::Domain(format!("lower bound {q_lower} exceeds the objective {rho} at a feasible point")));
    }
    let b = (rho - q_lower) / r;
    if !(b > 0.0) {
        return Err(Error::Domain("dual bound is zero; cannot cap the dual cone".into()));
    }
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimMetrics {
    pub subopt: Option<f64>,
    /// `d_{-K}(G(x))`.
    pub infeas: f64,
    /// Mean positive part of the constraint values (orthant only).
    pub mean_violation: f64,
    /// Unclamped sum of constraint values divided by `dim_x`, as printed in
    /// the original experiments.
    pub literal_violation: f64,
}

pub fn optim_metrics<P: ConicProblem + ?Sized>(p: &P, x: &Vector, rho_ref: Option<f64>) -> OptimMetrics {
    let g = p.constraint(x);
    let infeas = distance_to_minus_cone(&g, p.cone());
    let m = g.len().max(1) as f64;
    let mean_violation = match p.cone() {
        ConeSpec::NonnegOrthant => g.iter().map(|v| v.max(0.0)).sum::<f64>() / m,
        _ => infeas,
    };
    let literal_violation = g.sum() / p.dim_x() as f64;
    let subopt = rho_ref.map(|r| (p.rho(x) - r).abs() / r.abs().max(1.0));
    OptimMetrics { subopt, infeas, mean_violation, literal_violation }
}

/// `bound * P_{K*}(G(x)) / ||P_{K*}(G(x))||`, or zero when `x` is feasible.
pub fn y_dagger<P: ConicProblem + ?Sized>(p: &P, x: &Vector, bound: f64) -> Vector {
    let d = p.cone().project_dual(&p.constraint(x));
    let n = d.norm();
    if n == 0.0 {
        d
    } else {
        d * (bound / n)
    }
}
