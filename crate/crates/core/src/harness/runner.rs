//! Replication runner: builds the problem for each seed, solves it with a
//! problem-specific monitor, and writes `rep_XXX.csv` plus `summary.json`.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::backtrack::solve;
use crate::conic::{build_saddle_from_conic, optim_metrics, ConicProblem, ConicSaddle};
use crate::engine::{Algorithm, IterationRecord, MonitorOutput, SolveOptions, SolveReport, SolveStatus, SolverConfig};
use crate::harness::manifest::{DataSource, GameSpec, ProblemSpec, ReferencePolicy, RunManifest};
use crate::harness::rates::{rate_fit, Metric};
use crate::oracle::{EvalCounters, SaddleOracle};
use crate::zoo::qcqp::{lagrangian_dual_bound, qcqp_slater_bound};
use crate::zoo::svm::build_svm_saddle_with;
use crate::zoo::{
    blobs, build_kernel_matrices, gen_qcqp, load_csv_dataset, predict_labels, qcqp_to_conic, KernelSpec,
    KernelSvmInstance, MatrixGame, QcqpConic, SvmSaddle,
};
use crate::{BregmanGeometry, Error, GeometryKind, Matrix, Result, Vector};

pub const CSV_HEADER: &str = "k,elapsed_s,tau,sigma,theta,inner_steps,ek,gap,subopt,infeas,grad_x_evals,grad_y_evals";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// The run CSV for `records`; `elapsed_s` is left empty unless `timing`.
pub fn records_to_csv(records: &[IterationRecord], timing: bool) -> String {
    let mut s = String::with_capacity(96 * (records.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        let elapsed = if timing { r.elapsed_s.to_string() } else { String::new() };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.k,
            elapsed,
            r.tau,
            r.sigma,
            r.theta,
            r.inner_steps,
            opt(r.ek),
            opt(r.gap),
            opt(r.subopt),
            opt(r.infeas),
            r.grad_x_evals,
            r.grad_y_evals
        );
    }
    s
}

/// A built problem instance with its start point.
pub enum Built {
    Qcqp { saddle: ConicSaddle<QcqpConic>, dual_bound: f64 },
    Svm { saddle: SvmSaddle, inst: KernelSvmInstance, kernels: Vec<Matrix>, train: Vec<usize>, test: Vec<usize>, test_labels: Vector },
    Game(MatrixGame),
}

impl Built {
    pub fn oracle(&self) -> &dyn SaddleOracle {
        match self {
            Built::Qcqp { saddle, .. } => saddle,
            Built::Svm { saddle, .. } => saddle,
            Built::Game(g) => g,
        }
    }

    pub fn start(&self) -> (Vector, Vector) {
        match self {
            Built::Qcqp { saddle, .. } => (Vector::zeros(saddle.dim_x()), Vector::zeros(saddle.dim_y())),
            Built::Svm { saddle, .. } => saddle.default_start(),
            Built::Game(g) => tilted_start(g.a.nrows(), g.a.ncols()),
        }
    }

    /// A saddle point known in closed form, if any.
    pub fn analytic_reference(&self) -> Option<(Vector, Vector)> {
        match self {
            Built::Game(g) if is_rps(&g.a) => Some(g.uniform_start()),
            _ => None,
        }
    }
}

/// Interior strategies weighted `1, 2, ..., n` for the row player and the
/// reverse for the column player, so that symmetric games do not start at
/// their equilibrium.
pub fn tilted_start(n: usize, m: usize) -> (Vector, Vector) {
    let x = Vector::from_fn(n, |i, _| (i + 1) as f64);
    let y = Vector::from_fn(m, |j, _| (m - j) as f64);
    let (sx, sy) = (x.sum(), y.sum());
    (x / sx, y / sy)
}

fn is_rps(a: &Matrix) -> bool {
    a.shape() == (3, 3) && *a == rps()
}

pub fn rps() -> Matrix {
    Matrix::from_row_slice(3, 3, &[0.0, -1.0, 1.0, 1.0, 0.0, -1.0, -1.0, 1.0, 0.0])
}

fn geometry(kind: GeometryKind) -> BregmanGeometry {
    BregmanGeometry { kind }
}

/// Build the instance of `spec` for one replication seed.
pub fn build_problem(spec: &ProblemSpec, seed: u64) -> Result<Built> {
    match spec {
        ProblemSpec::Qcqp { n, m, strongly_convex, dual_bound, kappa } => {
            let conic = qcqp_to_conic(gen_qcqp(*n, *m, seed, *strongly_convex)?);
            let b = match dual_bound {
                Some(b) => *b,
                None => qcqp_slater_bound(&conic)?.bound,
            };
            let saddle = build_saddle_from_conic(conic, Some(b), *kappa)?;
            Ok(Built::Qcqp { saddle, dual_bound: b })
        }
        ProblemSpec::Svm { data, n_train, variant, c, lambda, kernels, geometry: g } => {
            let ds = match data {
                DataSource::Blobs { n_points, dim, separation } => blobs(*n_points, *dim, *separation, seed).normalized(),
                DataSource::Csv { path, label_column } => load_csv_dataset(path, label_column)?,
            };
            if ds.len() <= *n_train {
                return Err(Error::Config(format!("dataset has {} rows, need more than n_train = {n_train}", ds.len())));
            }
            let specs = kernels.clone().unwrap_or_else(KernelSpec::standard_set);
            let kmats = build_kernel_matrices(&ds, &specs)?;
            let train: Vec<usize> = (0..*n_train).collect();
            let test: Vec<usize> = (*n_train..ds.len()).collect();
            let labels = Vector::from_iterator(train.len(), train.iter().map(|&i| ds.labels[i]));
            let test_labels = Vector::from_iterator(test.len(), test.iter().map(|&i| ds.labels[i]));
            let inst = KernelSvmInstance::new(&kmats, &train, labels, *variant, *c, *lambda)?;
            let saddle = build_svm_saddle_with(&inst, geometry(*g))?;
            Ok(Built::Svm { saddle, inst, kernels: kmats, train, test, test_labels })
        }
        ProblemSpec::Game { game, geometry: g } => {
            let a = match game {
                GameSpec::Rps => rps(),
                GameSpec::Random { n, m } => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    Matrix::from_fn(*n, *m, |_, _| rng.random_range(-1.0..1.0))
                }
            };
            Ok(Built::Game(MatrixGame::with_geometry(a, geometry(*g))))
        }
    }
}

/// For plain APD without an explicit `sigma0`, fill the steps from the
/// recipe with `alpha = L_yx^2 / L_xx` (or `L_yx` when `L_xx = 0`).
pub fn effective_config(oracle: &dyn SaddleOracle, cfg: &SolverConfig) -> SolverConfig {
    if cfg.algorithm != Algorithm::Apd || cfg.sigma0.is_some() {
        return cfg.clone();
    }
    let Some(lip) = oracle.lipschitz() else {
        return cfg.clone();
    };
    let alpha = if lip.l_xx > 0.0 { lip.l_yx * lip.l_yx / lip.l_xx } else { lip.l_yx };
    SolverConfig {
        mu: cfg.mu,
        max_outer: cfg.max_outer,
        tol: cfg.tol,
        restart_period: cfg.restart_period,
        ..SolverConfig::apd_recipe(&lip, alpha, 1.0)
    }
}

/// Reference data feeding the monitors.
#[derive(Debug, Clone, Default)]
pub struct Reference {
    pub point: Option<(Vector, Vector)>,
    /// Optimal objective (QCQP) or saddle value (SVM, games).
    pub value: Option<f64>,
    /// Certified lower bound on the QCQP optimum, when available.
    pub lower_bound: Option<f64>,
}

fn long_run_reference(built: &Built, cfg: &SolverConfig) -> Result<Reference> {
    let o = built.oracle();
    let (x0, y0) = built.start();
    let long = SolverConfig {
        algorithm: Algorithm::Apdb,
        max_outer: cfg.max_outer.saturating_mul(100),
        tol: cfg.tol * 1e-4,
        ..cfg.clone()
    };
    let rep = solve(o, &long, &x0, &y0, SolveOptions::default())?;
    if rep.status == SolveStatus::Diverged {
        return Err(Error::Config(format!("long-run reference diverged: {}", rep.message.unwrap_or_default())));
    }
    let (x, y) = (rep.x_final, rep.y_final);
    Ok(match built {
        Built::Qcqp { saddle, .. } => {
            let lb = lagrangian_dual_bound(&saddle.problem.inst, &y, 20_000).ok();
            Reference { value: Some(saddle.problem.rho(&x)), lower_bound: lb, point: Some((x, y)) }
        }
        _ => Reference { value: Some(o.lagrangian(&x, &y)), lower_bound: None, point: Some((x, y)) },
    })
}

pub fn resolve_reference(built: &Built, policy: &ReferencePolicy, cfg: &SolverConfig) -> Result<Reference> {
    let o = built.oracle();
    match policy {
        ReferencePolicy::None => Ok(match built.analytic_reference() {
            Some((x, y)) => Reference { value: Some(o.lagrangian(&x, &y)), point: Some((x, y)), lower_bound: None },
            None => Reference::default(),
        }),
        ReferencePolicy::Injected { x, y } => {
            if x.len() != o.dim_x() || y.len() != o.dim_y() {
                return Err(Error::DimensionMismatch { expected: o.dim_x() + o.dim_y(), got: x.len() + y.len() });
            }
            let (x, y) = (Vector::from_vec(x.clone()), Vector::from_vec(y.clone()));
            let value = match built {
                Built::Qcqp { saddle, .. } => saddle.problem.rho(&x),
                _ => o.lagrangian(&x, &y),
            };
            Ok(Reference { value: Some(value), point: Some((x, y)), lower_bound: None })
        }
        ReferencePolicy::LongRun => long_run_reference(built, cfg),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicationSummary {
    pub replication: usize,
    pub seed: u64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub evals: EvalCounters,
    pub prox_trials: u64,
    pub final_gap: Option<f64>,
    pub final_subopt: Option<f64>,
    pub final_infeas: Option<f64>,
    pub gap_slope: Option<f64>,
    pub weight_slope: Option<f64>,
    pub reference_value: Option<f64>,
    pub reference_lower_bound: Option<f64>,
    pub dual_bound: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub wall_time_s: Option<f64>,
    pub message: Option<String>,
}

/// One replication's log: the records and their summary.
#[derive(Debug, Clone)]
pub struct ConvergenceLog {
    pub records: Vec<IterationRecord>,
    pub summary: ReplicationSummary,
}

fn relative_change(x: &Vector, y: &Vector, xp: &Vector, yp: &Vector) -> f64 {
    let num = ((x - xp).norm_squared() + (y - yp).norm_squared()).sqrt();
    num / (xp.norm_squared() + yp.norm_squared()).sqrt().max(1.0)
}

/// Solve one replication.
pub fn run_replication(manifest: &RunManifest, r: usize) -> Result<ConvergenceLog> {
    let seed = manifest.replication_seed(r);
    let built = build_problem(&manifest.problem, seed)?;
    let o = built.oracle();
    let cfg = effective_config(o, &manifest.solver);
    let reference = resolve_reference(&built, &manifest.reference, &cfg)?;
    let (x0, y0) = built.start();
    let tol = cfg.tol;
    let every = manifest.monitor_every;

    let mut prev: Option<(Vector, Vector)> = None;
    let monitor = |v: &crate::engine::IterView| -> MonitorOutput {
        let change = prev.as_ref().map(|(xp, yp)| relative_change(v.x, v.y, xp, yp));
        prev = Some((v.x.clone(), v.y.clone()));
        let fallback = tol > 0.0 && change.is_some_and(|c| c <= tol);
        if v.k % every != 0 {
            return MonitorOutput { stop: reference.value.is_none() && fallback, ..Default::default() };
        }
        match &built {
            Built::Qcqp { saddle, .. } => {
                let m = optim_metrics(&saddle.problem, v.x, reference.value);
                let stop = match m.subopt {
                    Some(s) => tol > 0.0 && s.max(m.mean_violation) <= tol,
                    None => fallback && m.mean_violation <= tol,
                };
                MonitorOutput { subopt: m.subopt, infeas: Some(m.mean_violation), stop }
            }
            Built::Svm { saddle, .. } => match (&reference.point, reference.value) {
                (Some((xs, _)), Some(l)) => {
                    // relative value error of the current iterate; a crossing of L* alone does not stop
                    let err = (saddle.lagrangian(v.x, v.y) - l).abs() / l.abs().max(1e-300);
                    let sol = (v.x - xs).norm() / xs.norm().max(1e-300);
                    MonitorOutput { subopt: Some(err), infeas: None, stop: tol > 0.0 && err <= tol && sol <= tol.sqrt() }
                }
                _ => MonitorOutput { stop: fallback, ..Default::default() },
            },
            Built::Game(g) => {
                let dg = g.duality_gap(v.x_erg, v.y_erg);
                MonitorOutput { subopt: Some(dg), infeas: None, stop: tol > 0.0 && dg <= tol }
            }
        }
    };
    let opts = SolveOptions {
        reference: reference.point.clone(),
        monitor: Some(Box::new(monitor)),
        record_timing: manifest.record_timing,
    };
    let started = std::time::Instant::now();
    let rep = solve(o, &cfg, &x0, &y0, opts)?;
    let wall = started.elapsed().as_secs_f64();
    let summary = summarize(manifest, r, seed, &built, &reference, &rep, wall)?;
    Ok(ConvergenceLog { records: rep.records, summary })
}

fn summarize(
    manifest: &RunManifest,
    r: usize,
    seed: u64,
    built: &Built,
    reference: &Reference,
    rep: &SolveReport,
    wall: f64,
) -> Result<ReplicationSummary> {
    let last = rep.records.last();
    let k = rep.records.len();
    let range = ((k / 10).max(1), k);
    let test_accuracy = match built {
        Built::Svm { inst, kernels, train, test, test_labels, .. } => {
            match predict_labels(inst, &rep.x_final, &rep.y_final, kernels, train, test) {
                Ok((pred, _)) => {
                    let hits = pred.iter().zip(test_labels.iter()).filter(|(p, t)| p == t).count();
                    Some(hits as f64 / test.len().max(1) as f64)
                }
                Err(e) => {
                    log::warn!("replication {r}: no prediction ({e})");
                    None
                }
            }
        }
        _ => None,
    };
    Ok(ReplicationSummary {
        replication: r,
        seed,
        status: rep.status,
        iterations: k,
        evals: rep.evals,
        prox_trials: rep.prox_trials(),
        final_gap: last.and_then(|l| l.gap),
        final_subopt: last.and_then(|l| l.subopt),
        final_infeas: last.and_then(|l| l.infeas),
        gap_slope: rate_fit(&rep.records, Metric::Gap, range).ok(),
        weight_slope: rate_fit(&rep.records, Metric::WeightTotal, range).ok(),
        reference_value: reference.value,
        reference_lower_bound: reference.lower_bound,
        dual_bound: match built {
            Built::Qcqp { dual_bound, .. } => Some(*dual_bound),
            _ => None,
        },
        test_accuracy,
        wall_time_s: manifest.record_timing.then_some(wall),
        message: rep.message.clone(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub manifest: RunManifest,
    pub replications: Vec<ReplicationSummary>,
    pub all_converged: bool,
}

/// Validate, solve every replication on a pool of `parallelism` workers and
/// write the outputs in replication order.
pub fn run_manifest(manifest: &RunManifest) -> Result<RunSummary> {
    manifest.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(manifest.parallelism)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let logs: Vec<Result<ConvergenceLog>> =
        pool.install(|| (0..manifest.replications).into_par_iter().map(|r| run_replication(manifest, r)).collect());
    let mut reps = Vec::with_capacity(logs.len());
    for (r, log) in logs.into_iter().enumerate() {
        let log = log?;
        write_text(&manifest.output_dir.join(format!("rep_{r:03}.csv")), &records_to_csv(&log.records, manifest.record_timing))?;
        reps.push(log.summary);
    }
    let all_converged = reps.iter().all(|s| s.status == SolveStatus::Converged);
    let summary = RunSummary { manifest: manifest.clone(), replications: reps, all_converged };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Parse(e.to_string()))?;
    write_text(&manifest.output_dir.join("summary.json"), &json)?;
    Ok(summary)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}
