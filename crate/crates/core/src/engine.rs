//! Main step, step-size schedule, ergodic averaging and the APD loop.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::check_dims;
use crate::linalg::is_finite;
use crate::oracle::{Counted, EvalCounters, LipschitzTriple, SaddleOracle};
use crate::{Error, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Apd,
    Apdb,
    ApdbSwitched,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "apd" => Ok(Self::Apd),
            "apdb" => Ok(Self::Apdb),
            "apdb_switched" => Ok(Self::ApdbSwitched),
            _ => Err(Error::Parse(format!("unknown algorithm '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EkVariant {
    Exact,
    Tilde,
}

impl std::str::FromStr for EkVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "tilde" => Ok(Self::Tilde),
            _ => Err(Error::Parse(format!("unknown test-function variant '{s}'"))),
        }
    }
}

/// Algorithm choice and all tunables.
///
/// `tau0` is the initial primal step for APD and the trial step `tau_bar`
/// for the backtracking variants. The initial dual step is `sigma0` when
/// given, else `gamma0 * tau0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Strong-convexity modulus used by the schedule; `None` takes the oracle's.
    pub mu: Option<f64>,
    pub tau0: f64,
    pub sigma0: Option<f64>,
    pub gamma0: Option<f64>,
    pub delta: f64,
    pub c_alpha: f64,
    pub c_beta: f64,
    pub eta: f64,
    pub tau_max: Option<f64>,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Early-stop tolerance on the reference gap, or on the relative iterate
    /// change when no reference is given; 0 disables. A monitor overrides it.
    pub tol: f64,
    pub restart_period: Option<usize>,
    pub ek_variant: EkVariant,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::backtracking_defaults(false)
    }
}

impl SolverConfig {
    /// Defaults for the line-search variants: `delta = 1e-3`, `eta = 0.7`,
    /// `c_alpha = c_beta = 0.49` when `L_yy > 0`, else `c_alpha = 0.999 - delta`.
    pub fn backtracking_defaults(l_yy_positive: bool) -> Self {
        let delta = 1e-3;
        let (c_alpha, c_beta) = if l_yy_positive { (0.49, 0.49) } else { (0.999 - delta, 0.0) };
        Self {
            algorithm: Algorithm::Apdb,
            mu: None,
            tau0: 1e-3,
            sigma0: None,
            gamma0: Some(1.0),
            delta,
            c_alpha,
            c_beta,
            eta: 0.7,
            tau_max: None,
            max_outer: 10_000,
            max_inner: 60,
            tol: 0.0,
            restart_period: None,
            ek_variant: EkVariant::Exact,
        }
    }

    /// APD with the step recipe `tau0 = (L_xx + L_yx^2/alpha)^-1`,
    /// `sigma0 = (alpha + 2 L_yy)^-1`, scaled by `scale` in (0, 1].
    ///
    /// The matching constants are `c_alpha = scale * alpha/(alpha + 2 L_yy)`,
    /// `c_beta = scale * L_yy/(alpha + 2 L_yy)` and `delta = 1 - scale`, which
    /// make both initial-step inequalities hold.
    pub fn apd_recipe(lip: &LipschitzTriple, alpha: f64, scale: f64) -> Self {
        let (tau0, sigma0) = recipe_steps(lip, alpha, scale, scale);
        let denom = alpha + 2.0 * lip.l_yy;
        Self {
            algorithm: Algorithm::Apd,
            tau0,
            sigma0: Some(sigma0),
            gamma0: None,
            delta: 1.0 - scale,
            c_alpha: scale * alpha / denom,
            c_beta: scale * lip.l_yy / denom,
            ..Self::backtracking_defaults(lip.l_yy > 0.0)
        }
    }

    pub fn initial_sigma(&self) -> f64 {
        self.sigma0.unwrap_or_else(|| self.gamma0.unwrap_or(1.0) * self.tau0)
    }

    pub fn initial_gamma(&self) -> f64 {
        match (self.gamma0, self.sigma0) {
            (_, Some(s)) if self.algorithm == Algorithm::Apd => s / self.tau0,
            (Some(g), _) => g,
            (None, Some(s)) => s / self.tau0,
            (None, None) => 1.0,
        }
    }

    /// Check the parameter constraints. `l_yy_positive` is `Some` when the
    /// problem's coupling constants are known.
    pub fn validate(&self, l_yy_positive: Option<bool>) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.delta >= 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in [0, 1), got {}", self.delta));
        }
        if !(self.c_alpha > 0.0) {
            return bad(format!("c_alpha must be positive, got {}", self.c_alpha));
        }
        if !(self.c_beta >= 0.0) {
            return bad(format!("c_beta must be nonnegative, got {}", self.c_beta));
        }
        let sum = self.c_alpha + self.c_beta + self.delta;
        if sum > 1.0 + 1e-12 {
            return bad(format!(
                "constraint c_alpha + c_beta + delta <= 1 violated: {} + {} + {} = {}",
                self.c_alpha, self.c_beta, self.delta, sum
            ));
        }
        if l_yy_positive == Some(true) && self.c_beta == 0.0 {
            return bad("c_beta must be positive when L_yy > 0".into());
        }
        if self.algorithm == Algorithm::ApdbSwitched && self.c_beta == 0.0 {
            return bad("the switched variant needs c_beta > 0".into());
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad(format!("eta must lie in (0, 1), got {}", self.eta));
        }
        if !(self.tau0 > 0.0) || !self.tau0.is_finite() {
            return bad(format!("tau0 must be positive, got {}", self.tau0));
        }
        if let Some(s) = self.sigma0 {
            if !(s > 0.0) || !s.is_finite() {
                return bad(format!("sigma0 must be positive, got {s}"));
            }
        }
        if let Some(g) = self.gamma0 {
            if !(g > 0.0) || !g.is_finite() {
                return bad(format!("gamma0 must be positive, got {g}"));
            }
        }
        if let Some(m) = self.mu {
            if !(m >= 0.0) || !m.is_finite() {
                return bad(format!("mu must be nonnegative, got {m}"));
            }
        }
        if let Some(t) = self.tau_max {
            if !(t > 0.0) {
                return bad(format!("tau_max must be positive, got {t}"));
            }
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return bad("max_outer and max_inner must be positive".into());
        }
        if !(self.tol >= 0.0) {
            return bad(format!("tol must be nonnegative, got {}", self.tol));
        }
        if self.restart_period == Some(0) {
            return bad("restart_period must be positive".into());
        }
        Ok(())
    }
}

/// `tau0 = c_tau (L_xx + L_yx^2/alpha)^-1`, `sigma0 = c_sigma (alpha + 2 L_yy)^-1`.
pub fn recipe_steps(lip: &LipschitzTriple, alpha: f64, c_tau: f64, c_sigma: f64) -> (f64, f64) {
    let tau0 = c_tau / (lip.l_xx + lip.l_yx * lip.l_yx / alpha);
    let sigma0 = c_sigma / (alpha + 2.0 * lip.l_yy);
    (tau0, sigma0)
}

/// Live schedule of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepState {
    pub k: usize,
    pub tau: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub theta: f64,
    pub t: f64,
    /// `T_k = sum_{j<k} t_j`.
    pub total: f64,
    pub sigma_prev: f64,
    pub prev_grad_y: Vector,
}

impl StepState {
    /// Fresh schedule with `sigma_{-1} = sigma0` (so `theta_0 = 1` for APD).
    pub fn new(tau0: f64, gamma0: f64, sigma_prev: f64, prev_grad_y: Vector) -> Self {
        Self {
            k: 0,
            tau: tau0,
            sigma: gamma0 * tau0,
            gamma: gamma0,
            theta: sigma_prev / (gamma0 * tau0),
            t: 1.0,
            total: 0.0,
            sigma_prev,
            prev_grad_y,
        }
    }
}

/// `gamma_{k+1} = gamma_k (1 + mu tau_k)`, `tau_{k+1} = tau_k sqrt(gamma_k / gamma_{k+1})`.
pub fn apd_schedule_next(gamma: f64, tau: f64, mu: f64) -> (f64, f64) {
    let gamma_next = gamma * (1.0 + mu * tau);
    (gamma_next, tau * (gamma / gamma_next).sqrt())
}

/// Both initial step-size inequalities, with `0^2/0 = 0`.
pub fn check_initial_stepsizes(
    lip: &LipschitzTriple,
    delta: f64,
    c_alpha: f64,
    c_beta: f64,
    tau0: f64,
    sigma0: f64,
) -> bool {
    const REL: f64 = 1e-12;
    // multiplied through by sigma0 so that a dominant l_xx does not cancel
    let lhs1 = (1.0 - delta) / tau0;
    let rhs1 = lip.l_xx + sigma0 * lip.l_yx * lip.l_yx / c_alpha;
    let ok1 = lhs1 >= rhs1 * (1.0 - REL);
    let lhs2 = 1.0 - (delta + c_alpha + c_beta);
    let rhs2 = if lip.l_yy == 0.0 {
        0.0
    } else if c_beta == 0.0 {
        f64::INFINITY
    } else {
        lip.l_yy * lip.l_yy / c_beta * sigma0 * sigma0
    };
    let ok2 = lhs2 >= rhs2 * (1.0 - REL) - REL;
    ok1 && ok2
}

/// Running weighted mean: returns `((T avg + t x) / (T + t), T + t)`.
pub fn ergodic_update(avg: &Vector, total: f64, x_next: &Vector, t: f64) -> (Vector, f64) {
    if total == 0.0 {
        return (x_next.clone(), t);
    }
    let new_total = total + t;
    (avg * (total / new_total) + x_next * (t / new_total), new_total)
}

pub(crate) fn ergodic_update_in_place(avg: &mut Vector, total: &mut f64, x_next: &Vector, t: f64) {
    if *total == 0.0 {
        avg.copy_from(x_next);
        *total = t;
        return;
    }
    let new_total = *total + t;
    avg.axpy(t / new_total, x_next, *total / new_total);
    *total = new_total;
}

pub struct MainStepOutput {
    pub x: Vector,
    pub y: Vector,
    /// `grad_y Phi(xbar, ybar)`, for caching.
    pub grad_y_at_bar: Vector,
    /// `grad_x Phi(xbar, y_hat)`, the gradient the primal prox used.
    pub grad_x_used: Vector,
}

/// One generic primal-dual step, dual first:
/// `s = (1+theta) grad_y(xbar,ybar) - theta grad_y(xp,yp)`, `y = prox_h(ybar, s, sigma)`,
/// `x = prox_f(xbar, grad_x(xbar, y), tau)`.
#[allow(clippy::too_many_arguments)]
pub fn main_step(
    oracle: &dyn SaddleOracle,
    xbar: &Vector,
    ybar: &Vector,
    xp: &Vector,
    yp: &Vector,
    tau: f64,
    sigma: f64,
    theta: f64,
) -> Result<MainStepOutput> {
    check_dims(oracle.dim_x(), xbar.len())?;
    check_dims(oracle.dim_x(), xp.len())?;
    check_dims(oracle.dim_y(), ybar.len())?;
    check_dims(oracle.dim_y(), yp.len())?;
    let gy_bar = oracle.grad_y(xbar, ybar);
    let gy_prev = if xp == xbar && yp == ybar { gy_bar.clone() } else { oracle.grad_y(xp, yp) };
    let (x, y, gx) = main_step_cached(oracle, xbar, ybar, &gy_bar, &gy_prev, tau, sigma, theta)?;
    Ok(MainStepOutput { x, y, grad_y_at_bar: gy_bar, grad_x_used: gx })
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn main_step_cached(
    oracle: &dyn SaddleOracle,
    xbar: &Vector,
    ybar: &Vector,
    gy_bar: &Vector,
    gy_prev: &Vector,
    tau: f64,
    sigma: f64,
    theta: f64,
) -> Result<(Vector, Vector, Vector)> {
    let s = gy_bar * (1.0 + theta) - gy_prev * theta;
    let y = oracle.prox_h(ybar, &s, sigma)?;
    let gx = oracle.grad_x(xbar, &y);
    let x = oracle.prox_f(xbar, &gx, tau)?;
    Ok((x, y, gx))
}

/// `L(xbar, y_ref) - L(x_ref, ybar)`; `+inf` when a point leaves its domain.
pub fn gap(oracle: &dyn SaddleOracle, xbar: &Vector, ybar: &Vector, x_ref: &Vector, y_ref: &Vector) -> f64 {
    let fx = oracle.f_value(xbar);
    let fr = oracle.f_value(x_ref);
    let hr = oracle.h_value(y_ref);
    let hy = oracle.h_value(ybar);
    if [fx, fr, hr, hy].iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    (fx + oracle.phi(xbar, y_ref) - hr) - (fr + oracle.phi(x_ref, ybar) - hy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    BudgetExhausted,
    Diverged,
}

/// One outer iteration. `k` counts completed iterations (1-based), so the
/// averages after this record are `x_bar_k`; `tau`, `sigma`, `theta`, `gamma`
/// are the values used by iteration `k - 1` and `weight_total` is `T_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub elapsed_s: f64,
    pub tau: f64,
    pub sigma: f64,
    pub theta: f64,
    pub gamma: f64,
    pub weight: f64,
    pub weight_total: f64,
    pub inner_steps: u32,
    pub ek: Option<f64>,
    pub ek_rhs: Option<f64>,
    pub ek_slack: Option<f64>,
    pub gap: Option<f64>,
    pub subopt: Option<f64>,
    pub infeas: Option<f64>,
    pub grad_x_evals: u64,
    pub grad_y_evals: u64,
    pub restarted: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub x_final: Vector,
    pub y_final: Vector,
    pub x_ergodic: Vector,
    pub y_ergodic: Vector,
    pub records: Vec<IterationRecord>,
    pub status: SolveStatus,
    pub evals: EvalCounters,
    /// Anchors and accepted initial steps of the last restart epoch.
    pub x0: Vector,
    pub y0: Vector,
    pub tau0: f64,
    pub sigma0: f64,
    pub gamma0: f64,
    pub message: Option<String>,
}

impl SolveReport {
    /// `Delta(x, y) = D_X(x, x0)/tau0 + D_Y(y, y0)/sigma0`.
    pub fn delta_at(&self, oracle: &dyn SaddleOracle, x: &Vector, y: &Vector) -> Result<f64> {
        Ok(oracle.geom_x().distance(x, &self.x0)? / self.tau0 + oracle.geom_y().distance(y, &self.y0)? / self.sigma0)
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// Line-search trials across the run: the sum of inner steps, so zero
    /// for plain APD.
    pub fn prox_trials(&self) -> u64 {
        self.records.iter().map(|r| r.inner_steps as u64).sum()
    }
}

/// Snapshot passed to a monitor after every outer iteration.
pub struct IterView<'a> {
    pub k: usize,
    pub x: &'a Vector,
    pub y: &'a Vector,
    pub x_erg: &'a Vector,
    pub y_erg: &'a Vector,
    pub x0: &'a Vector,
    pub y0: &'a Vector,
    pub tau0: f64,
    pub sigma0: f64,
    pub record: &'a IterationRecord,
    /// `gamma_k` after the schedule update.
    pub gamma_next: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MonitorOutput {
    pub subopt: Option<f64>,
    pub infeas: Option<f64>,
    pub stop: bool,
}

pub type Monitor<'m> = Box<dyn FnMut(&IterView) -> MonitorOutput + 'm>;

/// Optional run inputs: reference saddle point for gap logging, a monitor,
/// and wall-clock recording.
#[derive(Default)]
pub struct SolveOptions<'m> {
    pub reference: Option<(Vector, Vector)>,
    pub monitor: Option<Monitor<'m>>,
    pub record_timing: bool,
}

impl<'m> SolveOptions<'m> {
    pub fn with_reference(x: Vector, y: Vector) -> Self {
        Self { reference: Some((x, y)), ..Default::default() }
    }
}

/// Bookkeeping shared by all solver loops: averages, records, stopping.
pub(crate) struct Tracker<'m> {
    opts: SolveOptions<'m>,
    start: Instant,
    tol: f64,
    pub records: Vec<IterationRecord>,
    pub x_erg: Vector,
    pub y_erg: Vector,
    pub total: f64,
    pub x0: Vector,
    pub y0: Vector,
    pub tau0: f64,
    pub sigma0: f64,
    pub gamma0: f64,
    restarted_flag: bool,
}

pub(crate) enum Step {
    Continue,
    Stop(SolveStatus),
}

impl<'m> Tracker<'m> {
    pub fn new(opts: SolveOptions<'m>, tol: f64, x0: &Vector, y0: &Vector) -> Self {
        Self {
            opts,
            start: Instant::now(),
            tol,
            records: Vec::new(),
            x_erg: x0.clone(),
            y_erg: y0.clone(),
            total: 0.0,
            x0: x0.clone(),
            y0: y0.clone(),
            tau0: f64::NAN,
            sigma0: f64::NAN,
            gamma0: f64::NAN,
            restarted_flag: false,
        }
    }

    pub fn restart(&mut self, x: &Vector, y: &Vector) {
        self.x0 = x.clone();
        self.y0 = y.clone();
        self.total = 0.0;
        self.restarted_flag = true;
    }

    /// Fold in iterate `(x_next, y_next)` with weight `t`, log the record and
    /// decide whether to stop.
    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        oracle: &Counted,
        mut rec: IterationRecord,
        x_prev: &Vector,
        y_prev: &Vector,
        x_next: &Vector,
        y_next: &Vector,
        gamma_next: f64,
    ) -> Step {
        let mut tx = self.total;
        ergodic_update_in_place(&mut self.x_erg, &mut tx, x_next, rec.weight);
        let mut ty = self.total;
        ergodic_update_in_place(&mut self.y_erg, &mut ty, y_next, rec.weight);
        self.total = tx;
        rec.weight_total = self.total;
        rec.restarted = std::mem::take(&mut self.restarted_flag);
        if self.opts.record_timing {
            rec.elapsed_s = self.start.elapsed().as_secs_f64();
        }
        let c = oracle.counters();
        rec.grad_x_evals = c.grad_x;
        rec.grad_y_evals = c.grad_y;
        if let Some((xr, yr)) = &self.opts.reference {
            rec.gap = Some(gap(oracle.inner, &self.x_erg, &self.y_erg, xr, yr));
        }
        let mut monitor_stop = false;
        if let Some(mon) = self.opts.monitor.as_mut() {
            let view = IterView {
                k: rec.k,
                x: x_next,
                y: y_next,
                x_erg: &self.x_erg,
                y_erg: &self.y_erg,
                x0: &self.x0,
                y0: &self.y0,
                tau0: self.tau0,
                sigma0: self.sigma0,
                record: &rec,
                gamma_next,
            };
            let out = mon(&view);
            rec.subopt = out.subopt;
            rec.infeas = out.infeas;
            monitor_stop = out.stop;
        }
        // a monitor owns the stopping decision; otherwise the reference gap,
        // otherwise the relative iterate change
        let stop = if self.opts.monitor.is_some() {
            monitor_stop
        } else if self.tol > 0.0 {
            match rec.gap {
                Some(g) => g <= self.tol,
                None => {
                    let num = ((x_next - x_prev).norm_squared() + (y_next - y_prev).norm_squared()).sqrt();
                    let den = (x_prev.norm_squared() + y_prev.norm_squared()).sqrt().max(1.0);
                    num / den <= self.tol
                }
            }
        } else {
            false
        };
        self.records.push(rec);
        if stop {
            Step::Stop(SolveStatus::Converged)
        } else {
            Step::Continue
        }
    }

    pub fn finish(
        self,
        oracle: &Counted,
        x: Vector,
        y: Vector,
        status: SolveStatus,
        message: Option<String>,
    ) -> SolveReport {
        SolveReport {
            x_final: x,
            y_final: y,
            x_ergodic: self.x_erg,
            y_ergodic: self.y_erg,
            records: self.records,
            status,
            evals: oracle.counters(),
            x0: self.x0,
            y0: self.y0,
            tau0: self.tau0,
            sigma0: self.sigma0,
            gamma0: self.gamma0,
            message,
        }
    }
}

pub(crate) fn check_start(oracle: &dyn SaddleOracle, x0: &Vector, y0: &Vector) -> Result<()> {
    check_dims(oracle.dim_x(), x0.len())?;
    check_dims(oracle.dim_y(), y0.len())?;
    crate::linalg::check_finite(x0, "x0")?;
    crate::linalg::check_finite(y0, "y0")?;
    if !oracle.f_value(x0).is_finite() {
        return Err(Error::Domain("x0 is outside dom f".into()));
    }
    if !oracle.h_value(y0).is_finite() {
        return Err(Error::Domain("y0 is outside dom h".into()));
    }
    Ok(())
}

pub(crate) fn resolve_mu(oracle: &dyn SaddleOracle, config: &SolverConfig) -> Result<f64> {
    let mu = config.mu.unwrap_or_else(|| oracle.mu());
    if mu > oracle.mu() * (1.0 + 1e-12) + 1e-300 {
        return Err(Error::Config(format!(
            "schedule modulus mu = {mu} exceeds the oracle's strong-convexity modulus {}",
            oracle.mu()
        )));
    }
    if mu > 0.0 && oracle.geom_x().kind != crate::GeometryKind::Euclidean {
        return Err(Error::Config("mu > 0 needs the Euclidean primal geometry".into()));
    }
    Ok(mu)
}

/// The accelerated primal-dual method with known constants.
pub fn run_apd(
    oracle: &dyn SaddleOracle,
    config: &SolverConfig,
    x0: &Vector,
    y0: &Vector,
    reference: Option<(&Vector, &Vector)>,
) -> Result<SolveReport> {
    let opts = SolveOptions { reference: reference.map(|(a, b)| (a.clone(), b.clone())), ..Default::default() };
    run_apd_with(oracle, config, x0, y0, opts)
}

pub fn run_apd_with(
    oracle: &dyn SaddleOracle,
    config: &SolverConfig,
    x0: &Vector,
    y0: &Vector,
    opts: SolveOptions,
) -> Result<SolveReport> {
    let lip = oracle.lipschitz().ok_or_else(|| {
        Error::Config(
            "plain APD needs the coupling constants (L_xx, L_yx, L_yy); use the backtracking variant (apdb) instead"
                .into(),
        )
    })?;
    config.validate(Some(lip.l_yy > 0.0))?;
    check_start(oracle, x0, y0)?;
    let mu = resolve_mu(oracle, config)?;
    let tau0 = config.tau0;
    let sigma0 = config.initial_sigma();
    let gamma0 = sigma0 / tau0;
    if !check_initial_stepsizes(&lip, config.delta, config.c_alpha, config.c_beta, tau0, sigma0) {
        log::warn!("initial steps tau0={tau0}, sigma0={sigma0} violate the step-size conditions; proceeding");
    }

    let counted = Counted::new(oracle);
    let o: &dyn SaddleOracle = &counted;
    let mut tr = Tracker::new(opts, config.tol, x0, y0);
    tr.tau0 = tau0;
    tr.sigma0 = sigma0;
    tr.gamma0 = gamma0;

    let mut x = x0.clone();
    let mut y = y0.clone();
    let mut gy = o.grad_y(&x, &y);
    let mut st = StepState::new(tau0, gamma0, sigma0, gy.clone());
    let mut epoch_k = 0usize;

    for k in 0..config.max_outer {
        if let Some(p) = config.restart_period {
            if epoch_k == p {
                tr.restart(&x, &y);
                st = StepState::new(tau0, gamma0, sigma0, gy.clone());
                epoch_k = 0;
            }
        }
        st.sigma = st.gamma * st.tau;
        st.theta = st.sigma_prev / st.sigma;
        st.t = st.sigma / sigma0;
        let (xn, yn, _) = main_step_cached(o, &x, &y, &gy, &st.prev_grad_y, st.tau, st.sigma, st.theta)?;
        if !is_finite(&xn) || !is_finite(&yn) {
            let msg = format!("non-finite iterate at iteration {k}");
            return Ok(tr.finish(&counted, x, y, SolveStatus::Diverged, Some(msg)));
        }
        let gy_next = o.grad_y(&xn, &yn);
        let (gamma_next, tau_next) = apd_schedule_next(st.gamma, st.tau, mu);
        let rec = IterationRecord {
            k: k + 1,
            elapsed_s: 0.0,
            tau: st.tau,
            sigma: st.sigma,
            theta: st.theta,
            gamma: st.gamma,
            weight: st.t,
            weight_total: 0.0,
            inner_steps: 0,
            ek: None,
            ek_rhs: None,
            ek_slack: None,
            gap: None,
            subopt: None,
            infeas: None,
            grad_x_evals: 0,
            grad_y_evals: 0,
            restarted: false,
        };
        let step = tr.push(&counted, rec, &x, &y, &xn, &yn, gamma_next);
        st.total += st.t;
        st.sigma_prev = st.sigma;
        st.prev_grad_y = std::mem::replace(&mut gy, gy_next);
        st.gamma = gamma_next;
        st.tau = tau_next;
        st.k += 1;
        epoch_k += 1;
        x = xn;
        y = yn;
        if let Step::Stop(s) = step {
            return Ok(tr.finish(&counted, x, y, s, None));
        }
    }
    Ok(tr.finish(&counted, x, y, SolveStatus::BudgetExhausted, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_examples() {
        assert_eq!(apd_schedule_next(2.0, 0.3, 0.0), (2.0, 0.3));
        let (g, t) = apd_schedule_next(1.0, 1.0, 3.0);
        assert_eq!((g, t), (4.0, 0.5));
        // theta_{k+1} = tau_{k+1}/tau_k = 0.5 and sigma_{k+1} = g t = 2 sigma_k
        assert_eq!(g * t, 2.0);
    }

    #[test]
    fn initial_step_examples() {
        let lip = LipschitzTriple::new(1.0, 1.0, 0.0).unwrap();
        assert!(check_initial_stepsizes(&lip, 0.0, 1.0, 0.0, 0.5, 1.0));
        assert!(!check_initial_stepsizes(&lip, 0.0, 1.0, 0.0, 1.0, 1.0));
        let lyy = LipschitzTriple::new(1.0, 1.0, 2.0).unwrap();
        assert!(!check_initial_stepsizes(&lyy, 0.0, 0.5, 0.0, 0.1, 0.1));
    }

    #[test]
    fn ergodic_examples() {
        let p = |v: f64| Vector::from_element(1, v);
        let (mut a, mut t) = (Vector::zeros(1), 0.0);
        for v in [1.0, 2.0, 3.0] {
            (a, t) = ergodic_update(&a, t, &p(v), 1.0);
        }
        assert!((a[0] - 2.0).abs() < 1e-15 && t == 3.0);
        let (a1, _) = ergodic_update(&Vector::zeros(1), 0.0, &p(5.0), 0.7);
        assert_eq!(a1[0], 5.0);
        let (mut a, mut t) = (Vector::zeros(1), 0.0);
        for (v, w) in [(0.0, 1.0), (3.0, 2.0), (6.0, 4.0)] {
            (a, t) = ergodic_update(&a, t, &p(v), w);
        }
        assert!((a[0] - 30.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn validation_names_constraint() {
        let cfg = SolverConfig { c_alpha: 0.6, c_beta: 0.5, ..Default::default() };
        let e = cfg.validate(None).unwrap_err().to_string();
        assert!(e.contains("c_alpha + c_beta + delta <= 1"), "{e}");
    }
}
