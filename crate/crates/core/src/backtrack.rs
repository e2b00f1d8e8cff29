//! Line-search variants: the test functions, the inner loop and the full
//! backtracking solvers (dual-first and switched primal-first updates).

use serde::{Deserialize, Serialize};

use crate::engine::{
    apd_schedule_next, check_start, main_step_cached, resolve_mu, Algorithm, EkVariant, IterationRecord, SolveOptions,
    SolveReport, SolveStatus, SolverConfig, Step, Tracker,
};
use crate::geometry::{BregmanGeometry, GeometryKind};
use crate::linalg::{is_finite, norm_inf};
use crate::oracle::{Counted, LipschitzTriple, SaddleOracle};
use crate::{Error, Result, Vector};

const ACCEPT_REL: f64 = 1e-12;

/// Norm dual to the geometry's reference norm.
pub fn dual_norm(geom: BregmanGeometry, v: &Vector) -> f64 {
    match geom.kind {
        GeometryKind::Euclidean => v.norm(),
        GeometryKind::Entropy => norm_inf(v),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacktrackParams {
    pub delta: f64,
    pub c_alpha: f64,
    pub c_beta: f64,
    pub eta: f64,
    pub tau_bar: f64,
    pub gamma0: f64,
    pub tau_max: Option<f64>,
    pub max_inner: usize,
}

impl BacktrackParams {
    pub fn from_config(c: &SolverConfig) -> Self {
        Self {
            delta: c.delta,
            c_alpha: c.c_alpha,
            c_beta: c.c_beta,
            eta: c.eta,
            tau_bar: c.tau0,
            gamma0: c.initial_gamma(),
            tau_max: c.tau_max,
            max_inner: c.max_inner,
        }
    }
}

/// Arguments of the test function that belong to the current outer iteration.
#[derive(Debug, Clone)]
pub struct EkContext {
    pub x_k: Vector,
    pub y_k: Vector,
    /// `grad_y Phi(x_k, y_k)`.
    pub grad_y_at_k: Vector,
    /// Previous-iteration `alpha_k`, `beta_k`.
    pub alpha_k: f64,
    pub beta_k: f64,
    pub tau_k: f64,
    pub sigma_k: f64,
    pub theta_k: f64,
}

/// Value of a test function together with what it evaluated on the way.
#[derive(Debug, Clone)]
pub struct EkEval {
    pub value: f64,
    /// Roundoff allowance used by the acceptance test.
    pub slack: f64,
    pub d_x: f64,
    pub d_y: f64,
    /// `grad_y Phi(x, y)` at the candidate (cached for the next iteration).
    pub grad_y_at_candidate: Vector,
}

fn sq_over(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Shared evaluation of both variants. `gx_k_at_y` is `grad_x Phi(x_k, y)`
/// when the caller already has it (the main step computes exactly this).
pub(crate) fn eval_ek(
    oracle: &dyn SaddleOracle,
    ctx: &EkContext,
    x: &Vector,
    y: &Vector,
    alpha_next: f64,
    beta_next: f64,
    variant: EkVariant,
    gx_k_at_y: Option<&Vector>,
) -> Result<EkEval> {
    let dx = x - &ctx.x_k;
    let gx_k_owned;
    let gx_k = match gx_k_at_y {
        Some(g) => g,
        None => {
            gx_k_owned = oracle.grad_x(&ctx.x_k, y);
            &gx_k_owned
        }
    };
    let (first, slack_scale) = match variant {
        EkVariant::Exact => {
            let p1 = oracle.phi(x, y);
            let p0 = oracle.phi(&ctx.x_k, y);
            let lin = gx_k.dot(&dx);
            (p1 - p0 - lin, p1.abs() + p0.abs() + lin.abs())
        }
        EkVariant::Tilde => {
            let gx_new = oracle.grad_x(x, y);
            let a = gx_new.dot(&dx);
            let b = gx_k.dot(&dx);
            (a - b, a.abs() + b.abs())
        }
    };
    let gy_xy = oracle.grad_y(x, y);
    let gy_geom = oracle.geom_y();
    let beta_term = if beta_next == 0.0 && !oracle.grad_y_depends_on_y() {
        // grad_y Phi(x_k, .) is constant, so the numerator is identically zero
        None
    } else {
        let gy_ky = oracle.grad_y(&ctx.x_k, y);
        Some(gy_ky)
    };
    let alpha_term = match &beta_term {
        Some(gy_ky) => sq_over(dual_norm(gy_geom, &(&gy_xy - gy_ky)).powi(2), 2.0 * alpha_next),
        None => sq_over(dual_norm(gy_geom, &(&gy_xy - &ctx.grad_y_at_k)).powi(2), 2.0 * alpha_next),
    };
    let beta_val = match &beta_term {
        Some(gy_ky) => {
            let num = dual_norm(gy_geom, &(gy_ky - &ctx.grad_y_at_k)).powi(2);
            if beta_next == 0.0 {
                let scale = 1.0 + ctx.grad_y_at_k.norm_squared();
                if num > 1e-24 * scale {
                    return Err(Error::Misconfigured(format!(
                        "c_beta = 0 but grad_y Phi depends on y (numerator {num:e}); set c_beta > 0"
                    )));
                }
                0.0
            } else {
                sq_over(num, 2.0 * beta_next)
            }
        }
        None => 0.0,
    };
    let d_x = oracle.geom_x().distance(x, &ctx.x_k)?;
    let d_y = gy_geom.distance(y, &ctx.y_k)?;
    let dy_coef = 1.0 / ctx.sigma_k - ctx.theta_k * (ctx.alpha_k + ctx.beta_k);
    let value = first + alpha_term + beta_val - d_x / ctx.tau_k - dy_coef * d_y;
    Ok(EkEval { value, slack: ACCEPT_REL * (1.0 + slack_scale), d_x, d_y, grad_y_at_candidate: gy_xy })
}

/// The test function with the Bregman-of-Phi first line.
pub fn test_function_ek(
    oracle: &dyn SaddleOracle,
    ctx: &EkContext,
    x: &Vector,
    y: &Vector,
    alpha_next: f64,
    beta_next: f64,
) -> Result<f64> {
    Ok(eval_ek(oracle, ctx, x, y, alpha_next, beta_next, EkVariant::Exact, None)?.value)
}

/// The stronger variant whose first line is
/// `<grad_x Phi(x,y) - grad_x Phi(x_k,y), x - x_k>`.
pub fn test_function_ek_tilde(
    oracle: &dyn SaddleOracle,
    ctx: &EkContext,
    x: &Vector,
    y: &Vector,
    alpha_next: f64,
    beta_next: f64,
) -> Result<f64> {
    Ok(eval_ek(oracle, ctx, x, y, alpha_next, beta_next, EkVariant::Tilde, None)?.value)
}

/// Step-size floors for the line search with known constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiBounds {
    pub psi1: f64,
    /// `+inf` when `L_yy = 0`.
    pub psi2: f64,
    pub zeta: f64,
    pub psi: f64,
}

pub fn psi_bounds(lip: &LipschitzTriple, gamma0: f64, c_alpha: f64, c_beta: f64, delta: f64) -> PsiBounds {
    let lyx2 = lip.l_yx * lip.l_yx;
    let (zeta, psi1) = if lip.l_xx > 0.0 {
        let ratio = lyx2 / (lip.l_xx * lip.l_xx);
        let zeta = -1.0 + (1.0 + 4.0 * (1.0 - delta) * gamma0 / c_alpha * ratio).sqrt();
        (zeta, c_alpha * lip.l_xx / (2.0 * gamma0 * lyx2) * zeta)
    } else {
        (f64::INFINITY, ((1.0 - delta) * c_alpha / gamma0).sqrt() / lip.l_yx)
    };
    let psi2 = if lip.l_yy > 0.0 {
        (c_beta * (1.0 - (c_alpha + c_beta + delta))).max(0.0).sqrt() / (gamma0 * lip.l_yy)
    } else {
        f64::INFINITY
    };
    let psi = if lip.l_yy == 0.0 { psi1 } else { psi1.min(psi2) };
    PsiBounds { psi1, psi2, zeta, psi }
}

/// Largest step certified by the coupling constants at iteration `k`.
pub fn tau_hat(lip: &LipschitzTriple, gamma_k: f64, c_alpha: f64, c_beta: f64, delta: f64) -> f64 {
    let a = lip.l_yx * lip.l_yx * gamma_k / c_alpha;
    let first = 2.0 * (1.0 - delta) / (lip.l_xx + (lip.l_xx * lip.l_xx + 4.0 * (1.0 - delta) * a).sqrt());
    let second = if lip.l_yy > 0.0 {
        (c_beta * (1.0 - (c_alpha + c_beta + delta))).max(0.0).sqrt() / (gamma_k * lip.l_yy)
    } else {
        f64::INFINITY
    };
    first.min(second)
}

/// Inner-iteration cap `1 + ceil(log_{1/eta}(tau_bar / psi))` (at least 1).
pub fn inner_cap(tau_bar: f64, psi: f64, eta: f64) -> u32 {
    let l = ((tau_bar / psi).ln() / (1.0 / eta).ln()).max(0.0);
    1 + l.ceil() as u32
}

/// `min(tau_k sqrt(gamma_k/gamma_{k+1} (1 + tau_k/tau_{k-1})), tau_max)`.
pub fn nonmonotone_tau_next(tau_k: f64, tau_prev: f64, gamma_k: f64, gamma_next: f64, tau_max: f64) -> f64 {
    (tau_k * ((gamma_k / gamma_next) * (1.0 + tau_k / tau_prev)).sqrt()).min(tau_max)
}

/// Outcome of a geometric search `tau, eta tau, eta^2 tau, ...`.
pub struct SearchOutcome<T> {
    pub tau: f64,
    pub trials: u32,
    pub accepted: bool,
    pub last: T,
}

/// Shrink `tau` by `eta` until `trial(tau)` reports acceptance or
/// `max_inner` trials are spent.
pub fn geometric_search<T>(
    tau_start: f64,
    eta: f64,
    max_inner: usize,
    mut trial: impl FnMut(f64) -> Result<(T, bool)>,
) -> Result<SearchOutcome<T>> {
    let mut tau = tau_start;
    let mut trials = 0u32;
    loop {
        trials += 1;
        let (out, ok) = trial(tau)?;
        if ok || trials as usize >= max_inner {
            return Ok(SearchOutcome { tau, trials, accepted: ok, last: out });
        }
        tau *= eta;
    }
}

/// State carried between outer iterations of the dual-first line search.
#[derive(Debug, Clone)]
pub struct BacktrackState {
    pub x: Vector,
    pub y: Vector,
    /// `grad_y Phi(x_k, y_k)`.
    pub grad_y: Vector,
    /// `grad_y Phi(x_{k-1}, y_{k-1})`.
    pub prev_grad_y: Vector,
    /// Trial step the search starts from.
    pub tau: f64,
    pub gamma: f64,
    pub sigma_prev: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// One accepted outer step.
#[derive(Debug, Clone)]
pub struct OuterStep {
    pub x: Vector,
    pub y: Vector,
    pub tau: f64,
    pub sigma: f64,
    pub theta: f64,
    pub inner_count: u32,
    pub accepted: bool,
    pub ek: f64,
    pub rhs: f64,
    pub slack: f64,
    pub grad_y_next: Vector,
    pub alpha_next: f64,
    pub beta_next: f64,
}

struct Trial {
    x: Vector,
    y: Vector,
    sigma: f64,
    theta: f64,
    ek: f64,
    rhs: f64,
    slack: f64,
    gy: Vector,
    alpha_next: f64,
    beta_next: f64,
}

/// Inner loop of the dual-first line search.
pub fn backtrack_outer_step(
    oracle: &dyn SaddleOracle,
    state: &BacktrackState,
    params: &BacktrackParams,
    variant: EkVariant,
) -> Result<OuterStep> {
    let out = geometric_search(state.tau, params.eta, params.max_inner, |tau| {
        let sigma = state.gamma * tau;
        let theta = state.sigma_prev / sigma;
        let alpha_next = params.c_alpha / sigma;
        let beta_next = params.c_beta / sigma;
        let (x, y, gx) =
            main_step_cached(oracle, &state.x, &state.y, &state.grad_y, &state.prev_grad_y, tau, sigma, theta)?;
        if !is_finite(&x) || !is_finite(&y) {
            return Err(Error::NonFinite("backtracking candidate"));
        }
        let ctx = EkContext {
            x_k: state.x.clone(),
            y_k: state.y.clone(),
            grad_y_at_k: state.grad_y.clone(),
            alpha_k: state.alpha,
            beta_k: state.beta,
            tau_k: tau,
            sigma_k: sigma,
            theta_k: theta,
        };
        let ev = eval_ek(oracle, &ctx, &x, &y, alpha_next, beta_next, variant, Some(&gx))?;
        let rhs = -params.delta * (ev.d_x / tau + ev.d_y / sigma);
        let ok = ev.value <= rhs + ev.slack;
        let t = Trial {
            x,
            y,
            sigma,
            theta,
            ek: ev.value,
            rhs,
            slack: ev.slack,
            gy: ev.grad_y_at_candidate,
            alpha_next,
            beta_next,
        };
        Ok((t, ok))
    })?;
    let t = out.last;
    Ok(OuterStep {
        x: t.x,
        y: t.y,
        tau: out.tau,
        sigma: t.sigma,
        theta: t.theta,
        inner_count: out.trials,
        accepted: out.accepted,
        ek: t.ek,
        rhs: t.rhs,
        slack: t.slack,
        grad_y_next: t.gy,
        alpha_next: t.alpha_next,
        beta_next: t.beta_next,
    })
}

fn next_tau(params: &BacktrackParams, tau: f64, tau_prev: f64, gamma: f64, gamma_next: f64) -> f64 {
    match params.tau_max {
        Some(tm) => nonmonotone_tau_next(tau, tau_prev, gamma, gamma_next, tm),
        None => tau * (gamma / gamma_next).sqrt(),
    }
}

fn base_record(k: usize, tau: f64, sigma: f64, theta: f64, gamma: f64, weight: f64) -> IterationRecord {
    IterationRecord {
        k,
        elapsed_s: 0.0,
        tau,
        sigma,
        theta,
        gamma,
        weight,
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
    }
}

fn prepare(oracle: &dyn SaddleOracle, config: &SolverConfig, x0: &Vector, y0: &Vector) -> Result<f64> {
    config.validate(oracle.lipschitz().map(|l| l.l_yy > 0.0))?;
    check_start(oracle, x0, y0)?;
    resolve_mu(oracle, config)
}

/// The backtracking method; needs no coupling constants.
pub fn run_apdb(
    oracle: &dyn SaddleOracle,
    config: &SolverConfig,
    x0: &Vector,
    y0: &Vector,
    reference: Option<(&Vector, &Vector)>,
) -> Result<SolveReport> {
    let opts = SolveOptions { reference: reference.map(|(a, b)| (a.clone(), b.clone())), ..Default::default() };
    run_apdb_with(oracle, config, x0, y0, opts)
}

pub fn run_apdb_with(
    oracle: &dyn SaddleOracle,
    config: &SolverConfig,
    x0: &Vector,
    y0: &Vector,
    opts: SolveOptions,
) -> Result<SolveReport> {
    let mu = prepare(oracle, config, x0, y0)?;
    let params = BacktrackParams::from_config(config);
    let counted = Counted::new(oracle);
    let o: &dyn SaddleOracle = &counted;
    let mut tr = Tracker::new(opts, config.tol, x0, y0);
    tr.gamma0 = params.gamma0;

    let gy0 = o.grad_y(x0, y0);
    let fresh = |x: &Vector, y: &Vector, gy: &Vector| {
        let sigma_m1 = params.gamma0 * params.tau_bar;
        BacktrackState {
            x: x.clone(),
            y: y.clone(),
            grad_y: gy.clone(),
            prev_grad_y: gy.clone(),
            tau: params.tau_bar,
            gamma: params.gamma0,
            sigma_prev: sigma_m1,
            alpha: params.c_alpha / sigma_m1,
            beta: params.c_beta / sigma_m1,
        }
    };
    let mut st = fresh(x0, y0, &gy0);
    let mut tau_prev = params.tau_bar;
    let mut epoch_k = 0usize;
    let mut sigma0 = f64::NAN;

    for k in 0..config.max_outer {
        if let Some(p) = config.restart_period {
            if epoch_k == p {
                tr.restart(&st.x, &st.y);
                st = fresh(&st.x, &st.y, &st.grad_y);
                tau_prev = params.tau_bar;
                epoch_k = 0;
            }
        }
        let step = match backtrack_outer_step(o, &st, &params, config.ek_variant) {
            Ok(s) => s,
            Err(Error::NonFinite(_)) => {
                let msg = format!("non-finite candidate at iteration {k}");
                return Ok(tr.finish(&counted, st.x, st.y, SolveStatus::Diverged, Some(msg)));
            }
            Err(e) => return Err(e),
        };
        if !step.accepted {
            let msg = format!(
                "line search exhausted {} trials at iteration {k}; last test value {:e} vs bound {:e}",
                step.inner_count, step.ek, step.rhs
            );
            return Ok(tr.finish(&counted, st.x, st.y, SolveStatus::Diverged, Some(msg)));
        }
        if epoch_k == 0 {
            sigma0 = step.sigma;
            tr.tau0 = step.tau;
            tr.sigma0 = step.sigma;
        }
        let (gamma_next, _) = apd_schedule_next(st.gamma, step.tau, mu);
        let tau_next = next_tau(&params, step.tau, tau_prev, st.gamma, gamma_next);
        let mut rec = base_record(k + 1, step.tau, step.sigma, step.theta, st.gamma, step.sigma / sigma0);
        rec.inner_steps = step.inner_count;
        rec.ek = Some(step.ek);
        rec.ek_rhs = Some(step.rhs);
        rec.ek_slack = Some(step.slack);
        let flow = tr.push(&counted, rec, &st.x, &st.y, &step.x, &step.y, gamma_next);
        tau_prev = step.tau;
        st = BacktrackState {
            x: step.x,
            y: step.y,
            prev_grad_y: std::mem::replace(&mut st.grad_y, step.grad_y_next),
            grad_y: st.grad_y,
            tau: tau_next,
            gamma: gamma_next,
            sigma_prev: step.sigma,
            alpha: step.alpha_next,
            beta: step.beta_next,
        };
        epoch_k += 1;
        if let Step::Stop(s) = flow {
            return Ok(tr.finish(&counted, st.x, st.y, s, None));
        }
    }
    Ok(tr.finish(&counted, st.x, st.y, SolveStatus::BudgetExhausted, None))
}

/// Primal-first variant for conic problems whose dual domain is unbounded:
/// `x+ = prox_f(x_k, (1+theta) grad_x(x_k,y_k) - theta grad_x(x_{k-1},y_{k-1}), tau)`,
/// `y+ = prox_h(y_k, grad_y(x+, y_k), sigma)`, with the matching test function.
pub fn run_apdb_switched(
    oracle: &dyn SaddleOracle,
    config: &SolverConfig,
    x0: &Vector,
    y0: &Vector,
    reference: Option<(&Vector, &Vector)>,
) -> Result<SolveReport> {
    let opts = SolveOptions { reference: reference.map(|(a, b)| (a.clone(), b.clone())), ..Default::default() };
    run_apdb_switched_with(oracle, config, x0, y0, opts)
}

pub fn run_apdb_switched_with(
    oracle: &dyn SaddleOracle,
    config: &SolverConfig,
    x0: &Vector,
    y0: &Vector,
    opts: SolveOptions,
) -> Result<SolveReport> {
    let mut config = config.clone();
    config.algorithm = Algorithm::ApdbSwitched;
    let mu = prepare(oracle, &config, x0, y0)?;
    let p = BacktrackParams::from_config(&config);
    let counted = Counted::new(oracle);
    let o: &dyn SaddleOracle = &counted;
    let gx_geom = o.geom_x();
    let mut tr = Tracker::new(opts, config.tol, x0, y0);
    tr.gamma0 = p.gamma0;

    let mut x = x0.clone();
    let mut y = y0.clone();
    let mut gx = o.grad_x(&x, &y);
    let mut gx_prev = gx.clone();
    let sigma_m1 = p.gamma0 * p.tau_bar;
    let mut tau = p.tau_bar;
    let mut tau_prev = p.tau_bar;
    let mut gamma = p.gamma0;
    let mut sigma_prev = sigma_m1;
    let mut alpha = p.c_alpha / p.tau_bar;
    let mut beta = p.gamma0 * p.c_beta / sigma_m1;
    let mut sigma0 = f64::NAN;
    let mut epoch_k = 0usize;

    for k in 0..config.max_outer {
        if let Some(per) = config.restart_period {
            if epoch_k == per {
                tr.restart(&x, &y);
                gx_prev = gx.clone();
                tau = p.tau_bar;
                tau_prev = p.tau_bar;
                gamma = p.gamma0;
                sigma_prev = sigma_m1;
                alpha = p.c_alpha / p.tau_bar;
                beta = p.gamma0 * p.c_beta / sigma_m1;
                epoch_k = 0;
            }
        }
        let search = geometric_search(tau, p.eta, p.max_inner, |tau_k| {
            let sigma = gamma * tau_k;
            let theta = sigma_prev / sigma;
            let a_next = p.c_alpha / tau_k;
            let b_next = p.gamma0 * p.c_beta / sigma;
            let s = &gx * (1.0 + theta) - &gx_prev * theta;
            let xn = o.prox_f(&x, &s, tau_k)?;
            let gy = o.grad_y(&xn, &y);
            let yn = o.prox_h(&y, &gy, sigma)?;
            if !is_finite(&xn) || !is_finite(&yn) {
                return Err(Error::NonFinite("switched candidate"));
            }
            let g_pp = o.grad_x(&xn, &yn);
            let g_pk = o.grad_x(&xn, &y);
            let d_x = gx_geom.distance(&xn, &x)?;
            let d_y = o.geom_y().distance(&yn, &y)?;
            let t1 = sq_over(dual_norm(gx_geom, &(&g_pp - &g_pk)).powi(2), 2.0 * a_next);
            let t2 = sq_over(dual_norm(gx_geom, &(&g_pk - &gx)).powi(2), 2.0 * b_next);
            let ek = t1 - d_y / sigma + t2 - (1.0 / tau_k - theta * (alpha + beta)) * d_x;
            let rhs = -p.delta * (d_x / tau_k + d_y / sigma);
            let slack = ACCEPT_REL * (1.0 + t1.abs() + t2.abs());
            let ok = ek <= rhs + slack;
            Ok(((xn, yn, g_pp, sigma, theta, a_next, b_next, ek, rhs, slack), ok))
        });
        let search = match search {
            Ok(s) => s,
            Err(Error::NonFinite(_)) => {
                let msg = format!("non-finite candidate at iteration {k}");
                return Ok(tr.finish(&counted, x, y, SolveStatus::Diverged, Some(msg)));
            }
            Err(e) => return Err(e),
        };
        let (xn, yn, g_pp, sigma, theta, a_next, b_next, ek, rhs, slack) = search.last;
        if !search.accepted {
            let msg = format!(
                "line search exhausted {} trials at iteration {k}; last test value {ek:e} vs bound {rhs:e}",
                search.trials
            );
            return Ok(tr.finish(&counted, x, y, SolveStatus::Diverged, Some(msg)));
        }
        let tau_k = search.tau;
        if epoch_k == 0 {
            sigma0 = sigma;
            tr.tau0 = tau_k;
            tr.sigma0 = sigma;
        }
        let (gamma_next, _) = apd_schedule_next(gamma, tau_k, mu);
        let tau_next = next_tau(&p, tau_k, tau_prev, gamma, gamma_next);
        let mut rec = base_record(k + 1, tau_k, sigma, theta, gamma, sigma / sigma0);
        rec.inner_steps = search.trials;
        rec.ek = Some(ek);
        rec.ek_rhs = Some(rhs);
        rec.ek_slack = Some(slack);
        let flow = tr.push(&counted, rec, &x, &y, &xn, &yn, gamma_next);
        gx_prev = std::mem::replace(&mut gx, g_pp);
        x = xn;
        y = yn;
        alpha = a_next;
        beta = b_next;
        sigma_prev = sigma;
        tau_prev = tau_k;
        gamma = gamma_next;
        tau = tau_next;
        epoch_k += 1;
        if let Step::Stop(s) = flow {
            return Ok(tr.finish(&counted, x, y, s, None));
        }
    }
    Ok(tr.finish(&counted, x, y, SolveStatus::BudgetExhausted, None))
}

/// Dispatch on `config.algorithm`.
pub fn solve(oracle: &dyn SaddleOracle, config: &SolverConfig, x0: &Vector, y0: &Vector, opts: SolveOptions) -> Result<SolveReport> {
    match config.algorithm {
        Algorithm::Apd => crate::engine::run_apd_with(oracle, config, x0, y0, opts),
        Algorithm::Apdb => run_apdb_with(oracle, config, x0, y0, opts),
        Algorithm::ApdbSwitched => run_apdb_switched_with(oracle, config, x0, y0, opts),
    }
}
