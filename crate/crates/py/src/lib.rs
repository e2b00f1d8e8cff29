//! Python bindings: problem builders, the solvers, the verification suite
//! and manifest runs. Vectors cross the boundary as lists of floats.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use apd_core::backtrack::solve as core_solve;
use apd_core::conic::{build_saddle_from_conic, ConicSaddle};
use apd_core::engine::{apd_schedule_next, gap, Algorithm, EkVariant, IterationRecord, SolveOptions, SolveReport, SolverConfig};
use apd_core::harness::manifest::{DataSource, GameSpec, ProblemSpec, RunManifest};
use apd_core::harness::runner::{build_problem, effective_config, records_to_csv, run_manifest, Built};
use apd_core::harness::verify::zoo_suite;
use apd_core::zoo::qcqp::QcqpConic;
use apd_core::zoo::{gen_qcqp, qcqp_to_conic, BilinearBox, SvmVariant};
use apd_core::{Error, GeometryKind, LipschitzTriple, Matrix, SaddleOracle, Vector};

pub fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Prox(_) | Error::NonFinite(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn vector(v: &[f64]) -> Vector {
    Vector::from_column_slice(v)
}

pub fn matrix(rows: &[Vec<f64>]) -> apd_core::Result<Matrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Domain("matrix must be a non-empty list of equal-length rows".into()));
    }
    Ok(Matrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn geometry(entropy: bool) -> GeometryKind {
    if entropy {
        GeometryKind::Entropy
    } else {
        GeometryKind::Euclidean
    }
}

/// Solver settings. Defaults are those of the line-search variants.
#[pyclass(name = "SolverConfig", get_all, set_all, from_py_object)]
#[derive(Clone, Debug)]
pub struct PyConfig {
    pub algorithm: String,
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
    pub tol: f64,
    pub restart_period: Option<usize>,
    pub ek_variant: String,
}

impl From<&SolverConfig> for PyConfig {
    fn from(c: &SolverConfig) -> Self {
        let algorithm = match c.algorithm {
            Algorithm::Apd => "apd",
            Algorithm::Apdb => "apdb",
            Algorithm::ApdbSwitched => "apdb-switched",
        };
        let ek_variant = match c.ek_variant {
            EkVariant::Exact => "exact",
            EkVariant::Tilde => "tilde",
        };
        Self {
            algorithm: algorithm.into(),
            mu: c.mu,
            tau0: c.tau0,
            sigma0: c.sigma0,
            gamma0: c.gamma0,
            delta: c.delta,
            c_alpha: c.c_alpha,
            c_beta: c.c_beta,
            eta: c.eta,
            tau_max: c.tau_max,
            max_outer: c.max_outer,
            max_inner: c.max_inner,
            tol: c.tol,
            restart_period: c.restart_period,
            ek_variant: ek_variant.into(),
        }
    }
}

impl PyConfig {
    pub fn to_core(&self) -> apd_core::Result<SolverConfig> {
        Ok(SolverConfig {
            algorithm: self.algorithm.parse()?,
            mu: self.mu,
            tau0: self.tau0,
            sigma0: self.sigma0,
            gamma0: self.gamma0,
            delta: self.delta,
            c_alpha: self.c_alpha,
            c_beta: self.c_beta,
            eta: self.eta,
            tau_max: self.tau_max,
            max_outer: self.max_outer,
            max_inner: self.max_inner,
            tol: self.tol,
            restart_period: self.restart_period,
            ek_variant: self.ek_variant.parse()?,
        })
    }

    /// Line-search defaults for `algorithm`; the switched variant gets
    /// `c_alpha = c_beta = 0.49`.
    pub fn defaults(algorithm: &str) -> apd_core::Result<Self> {
        let alg: Algorithm = algorithm.parse()?;
        let mut c = PyConfig::from(&SolverConfig { algorithm: alg, ..SolverConfig::default() });
        if alg == Algorithm::ApdbSwitched {
            c.c_alpha = 0.49;
            c.c_beta = 0.49;
        }
        Ok(c)
    }
}

macro_rules! overlay {
    ($c:ident, $($f:ident),*) => {
        $( if let Some(v) = $f { $c.$f = v; } )*
    };
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (
        algorithm = "apdb", *, mu = None, tau0 = None, sigma0 = None, gamma0 = None, delta = None,
        c_alpha = None, c_beta = None, eta = None, tau_max = None, max_outer = None, max_inner = None,
        tol = None, restart_period = None, ek_variant = None
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        algorithm: &str,
        mu: Option<f64>,
        tau0: Option<f64>,
        sigma0: Option<f64>,
        gamma0: Option<f64>,
        delta: Option<f64>,
        c_alpha: Option<f64>,
        c_beta: Option<f64>,
        eta: Option<f64>,
        tau_max: Option<f64>,
        max_outer: Option<usize>,
        max_inner: Option<usize>,
        tol: Option<f64>,
        restart_period: Option<usize>,
        ek_variant: Option<String>,
    ) -> PyResult<Self> {
        let mut c = PyConfig::defaults(algorithm).map_err(to_py_err)?;
        c.mu = mu;
        c.sigma0 = sigma0;
        c.tau_max = tau_max;
        c.restart_period = restart_period;
        if gamma0.is_some() {
            c.gamma0 = gamma0;
        }
        overlay!(c, tau0, delta, c_alpha, c_beta, eta, max_outer, max_inner, tol, ek_variant);
        Ok(c)
    }

    /// APD steps `tau0 = (L_xx + L_yx^2/alpha)^-1`, `sigma0 = (alpha + 2 L_yy)^-1`
    /// scaled by `scale`, with matching `c_alpha`, `c_beta` and `delta`.
    #[staticmethod]
    #[pyo3(signature = (l_xx, l_yx, l_yy, alpha, scale = 1.0))]
    fn apd_recipe(l_xx: f64, l_yx: f64, l_yy: f64, alpha: f64, scale: f64) -> PyResult<Self> {
        let lip = LipschitzTriple::new(l_xx, l_yx, l_yy).map_err(to_py_err)?;
        Ok(PyConfig::from(&SolverConfig::apd_recipe(&lip, alpha, scale)))
    }

    fn validate(&self) -> PyResult<()> {
        self.to_core().and_then(|c| c.validate(None)).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!("{self:?}").replacen("PyConfig", "SolverConfig", 1)
    }
}

pub enum Inner {
    Built(Built),
    Bilinear(BilinearBox),
    /// QCQP with an uncapped dual, for the switched variant.
    Unbounded(ConicSaddle<QcqpConic>),
}

/// A saddle problem from the zoo.
#[pyclass(name = "Problem", frozen)]
pub struct PyProblem {
    pub inner: Inner,
    pub label: String,
}

impl PyProblem {
    pub fn oracle(&self) -> &dyn SaddleOracle {
        match &self.inner {
            Inner::Built(b) => b.oracle(),
            Inner::Bilinear(b) => b,
            Inner::Unbounded(s) => s,
        }
    }

    pub fn start_point(&self) -> (Vector, Vector) {
        match &self.inner {
            Inner::Built(b) => b.start(),
            _ => {
                let o = self.oracle();
                (Vector::zeros(o.dim_x()), Vector::zeros(o.dim_y()))
            }
        }
    }

    pub fn qcqp(n: usize, m: usize, strongly_convex: bool, seed: u64, bounded: bool) -> apd_core::Result<Self> {
        let inner = if bounded {
            Inner::Built(build_problem(&ProblemSpec::Qcqp { n, m, strongly_convex, dual_bound: None, kappa: None }, seed)?)
        } else {
            Inner::Unbounded(build_saddle_from_conic(qcqp_to_conic(gen_qcqp(n, m, seed, strongly_convex)?), None, None)?)
        };
        Ok(Self { inner, label: format!("qcqp n={n} m={m} seed={seed}") })
    }

    pub fn game(a: Matrix, entropy: bool) -> apd_core::Result<Self> {
        // build_problem covers only generated games; wrap the matrix directly
        let game = apd_core::zoo::MatrixGame::with_geometry(a, apd_core::BregmanGeometry { kind: geometry(entropy) });
        let label = format!("game {}x{}", game.a.nrows(), game.a.ncols());
        Ok(Self { inner: Inner::Built(Built::Game(game)), label })
    }

    pub fn check_point(&self, x: &[f64], y: &[f64]) -> apd_core::Result<(Vector, Vector)> {
        let o = self.oracle();
        if x.len() != o.dim_x() || y.len() != o.dim_y() {
            return Err(Error::DimensionMismatch { expected: o.dim_x() + o.dim_y(), got: x.len() + y.len() });
        }
        Ok((vector(x), vector(y)))
    }
}

#[pymethods]
impl PyProblem {
    /// Random QCQP over a box. `bounded=False` keeps the dual uncapped (use
    /// the `apdb-switched` algorithm then).
    #[staticmethod]
    #[pyo3(signature = (n = 50, m = 5, strongly_convex = false, seed = 0, bounded = true))]
    fn random_qcqp(n: usize, m: usize, strongly_convex: bool, seed: u64, bounded: bool) -> PyResult<Self> {
        Self::qcqp(n, m, strongly_convex, seed, bounded).map_err(to_py_err)
    }

    /// Matrix game `min_x max_y x'Ay` over the simplices.
    #[staticmethod]
    #[pyo3(signature = (a, entropy = false))]
    fn matrix_game(a: Vec<Vec<f64>>, entropy: bool) -> PyResult<Self> {
        matrix(&a).and_then(|a| Self::game(a, entropy)).map_err(to_py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (entropy = false))]
    fn rps(entropy: bool) -> PyResult<Self> {
        let spec = ProblemSpec::Game { game: GameSpec::Rps, geometry: geometry(entropy) };
        let b = build_problem(&spec, 0).map_err(to_py_err)?;
        Ok(Self { inner: Inner::Built(b), label: "rps".into() })
    }

    /// Kernel SVM on two Gaussian blobs; the first `n_train` points train.
    #[staticmethod]
    #[pyo3(signature = (n_points = 80, dim = 2, separation = 4.0, n_train = 60, variant = "l2", c = None, lam = 1.0, seed = 0, entropy = false))]
    #[allow(clippy::too_many_arguments)]
    fn svm_blobs(
        n_points: usize,
        dim: usize,
        separation: f64,
        n_train: usize,
        variant: &str,
        c: Option<f64>,
        lam: f64,
        seed: u64,
        entropy: bool,
    ) -> PyResult<Self> {
        let variant = match variant {
            "l1" => SvmVariant::L1,
            "l2" => SvmVariant::L2,
            _ => return Err(PyValueError::new_err(format!("unknown SVM variant '{variant}', expected l1 or l2"))),
        };
        let spec = ProblemSpec::Svm {
            data: DataSource::Blobs { n_points, dim, separation },
            n_train,
            variant,
            c,
            lambda: lam,
            kernels: None,
            geometry: geometry(entropy),
        };
        let b = build_problem(&spec, seed).map_err(to_py_err)?;
        Ok(Self { inner: Inner::Built(b), label: format!("svm blobs seed={seed}") })
    }

    /// `mu/2 ||x||^2 + 1/2 x'Qx + c'x + <Kx, y> - d'y` over boxes.
    #[staticmethod]
    #[pyo3(signature = (q, c, k, d, rx = 1.0, ry = 1.0, mu = 0.0))]
    fn bilinear_box(q: Vec<Vec<f64>>, c: Vec<f64>, k: Vec<Vec<f64>>, d: Vec<f64>, rx: f64, ry: f64, mu: f64) -> PyResult<Self> {
        let b = BilinearBox::new(matrix(&q).map_err(to_py_err)?, vector(&c), matrix(&k).map_err(to_py_err)?, vector(&d), rx, ry, mu)
            .map_err(to_py_err)?;
        Ok(Self { inner: Inner::Bilinear(b), label: "bilinear box".into() })
    }

    #[getter]
    fn dim_x(&self) -> usize {
        self.oracle().dim_x()
    }

    #[getter]
    fn dim_y(&self) -> usize {
        self.oracle().dim_y()
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.oracle().mu()
    }

    /// `(L_xx, L_yx, L_yy)` when known.
    fn lipschitz(&self) -> Option<(f64, f64, f64)> {
        self.oracle().lipschitz().map(|l| (l.l_xx, l.l_yx, l.l_yy))
    }

    /// The default start point `(x0, y0)`.
    fn start(&self) -> (Vec<f64>, Vec<f64>) {
        let (x, y) = self.start_point();
        (x.as_slice().to_vec(), y.as_slice().to_vec())
    }

    fn lagrangian(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        let (x, y) = self.check_point(&x, &y).map_err(to_py_err)?;
        Ok(self.oracle().lagrangian(&x, &y))
    }

    fn grad_x(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<f64>> {
        let (x, y) = self.check_point(&x, &y).map_err(to_py_err)?;
        Ok(self.oracle().grad_x(&x, &y).as_slice().to_vec())
    }

    fn grad_y(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<f64>> {
        let (x, y) = self.check_point(&x, &y).map_err(to_py_err)?;
        Ok(self.oracle().grad_y(&x, &y).as_slice().to_vec())
    }

    /// `L(xbar, y_ref) - L(x_ref, ybar)`.
    fn gap(&self, xbar: Vec<f64>, ybar: Vec<f64>, x_ref: Vec<f64>, y_ref: Vec<f64>) -> PyResult<f64> {
        let (xb, yb) = self.check_point(&xbar, &ybar).map_err(to_py_err)?;
        let (xr, yr) = self.check_point(&x_ref, &y_ref).map_err(to_py_err)?;
        Ok(gap(self.oracle(), &xb, &yb, &xr, &yr))
    }

    fn __repr__(&self) -> String {
        format!("Problem({}, dim_x={}, dim_y={})", self.label, self.oracle().dim_x(), self.oracle().dim_y())
    }
}

/// Outcome of a solve.
#[pyclass(name = "SolveResult", frozen)]
pub struct PyReport {
    pub report: SolveReport,
}

fn status_name(r: &SolveReport) -> &'static str {
    match r.status {
        apd_core::engine::SolveStatus::Converged => "converged",
        apd_core::engine::SolveStatus::BudgetExhausted => "budget_exhausted",
        apd_core::engine::SolveStatus::Diverged => "diverged",
    }
}

fn column(records: &[IterationRecord], name: &str) -> apd_core::Result<Vec<Option<f64>>> {
    let pick: fn(&IterationRecord) -> Option<f64> = match name {
        "tau" => |r| Some(r.tau),
        "sigma" => |r| Some(r.sigma),
        "theta" => |r| Some(r.theta),
        "gamma" => |r| Some(r.gamma),
        "weight" => |r| Some(r.weight),
        "weight_total" => |r| Some(r.weight_total),
        "inner_steps" => |r| Some(r.inner_steps as f64),
        "ek" => |r| r.ek,
        "gap" => |r| r.gap,
        "subopt" => |r| r.subopt,
        "infeas" => |r| r.infeas,
        _ => return Err(Error::Parse(format!("unknown record column '{name}'"))),
    };
    Ok(records.iter().map(pick).collect())
}

#[pymethods]
impl PyReport {
    #[getter]
    fn x(&self) -> Vec<f64> {
        self.report.x_final.as_slice().to_vec()
    }
    #[getter]
    fn y(&self) -> Vec<f64> {
        self.report.y_final.as_slice().to_vec()
    }
    #[getter]
    fn x_ergodic(&self) -> Vec<f64> {
        self.report.x_ergodic.as_slice().to_vec()
    }
    #[getter]
    fn y_ergodic(&self) -> Vec<f64> {
        self.report.y_ergodic.as_slice().to_vec()
    }
    #[getter]
    fn status(&self) -> &'static str {
        status_name(&self.report)
    }
    #[getter]
    fn iterations(&self) -> usize {
        self.report.iterations()
    }
    #[getter]
    fn tau0(&self) -> f64 {
        self.report.tau0
    }
    #[getter]
    fn sigma0(&self) -> f64 {
        self.report.sigma0
    }
    #[getter]
    fn gradient_evals(&self) -> u64 {
        self.report.evals.grad_x + self.report.evals.grad_y
    }
    #[getter]
    fn prox_trials(&self) -> u64 {
        self.report.prox_trials()
    }
    #[getter]
    fn message(&self) -> Option<String> {
        self.report.message.clone()
    }

    /// One record field per iteration; `None` where it was not recorded.
    fn column(&self, name: &str) -> PyResult<Vec<Option<f64>>> {
        column(&self.report.records, name).map_err(to_py_err)
    }

    /// The iteration log in the CSV format of the command-line tool.
    fn records_csv(&self) -> String {
        records_to_csv(&self.report.records, false)
    }

    fn __repr__(&self) -> String {
        format!("SolveResult(status={}, iterations={})", status_name(&self.report), self.report.iterations())
    }
}

/// Run the solver chosen by `config.algorithm`. Plain APD without `sigma0`
/// takes the balanced recipe steps. The reference pair, when given, turns on
/// gap logging.
pub fn solve_problem(
    problem: &PyProblem,
    config: &PyConfig,
    start: Option<(Vec<f64>, Vec<f64>)>,
    reference: Option<(Vec<f64>, Vec<f64>)>,
) -> apd_core::Result<SolveReport> {
    let o = problem.oracle();
    let cfg = effective_config(o, &config.to_core()?);
    let (x0, y0) = match start {
        Some((x, y)) => problem.check_point(&x, &y)?,
        None => problem.start_point(),
    };
    let reference = reference.map(|(x, y)| problem.check_point(&x, &y)).transpose()?;
    let opts = SolveOptions { reference, ..Default::default() };
    core_solve(o, &cfg, &x0, &y0, opts)
}

#[pyfunction]
#[pyo3(signature = (problem, config = None, x0 = None, y0 = None, reference = None))]
fn solve(
    py: Python<'_>,
    problem: &Bound<'_, PyProblem>,
    config: Option<PyConfig>,
    x0: Option<Vec<f64>>,
    y0: Option<Vec<f64>>,
    reference: Option<(Vec<f64>, Vec<f64>)>,
) -> PyResult<PyReport> {
    let config = match config {
        Some(c) => c,
        None => PyConfig::defaults("apdb").map_err(to_py_err)?,
    };
    let start = match (x0, y0) {
        (Some(x), Some(y)) => Some((x, y)),
        (None, None) => None,
        _ => return Err(PyValueError::new_err("give both x0 and y0 or neither")),
    };
    let p = problem.get();
    let report = py.detach(|| solve_problem(p, &config, start, reference)).map_err(to_py_err)?;
    Ok(PyReport { report })
}

/// `(gamma_{k+1}, tau_{k+1})` from `(gamma_k, tau_k)`.
#[pyfunction]
fn schedule_next(gamma: f64, tau: f64, mu: f64) -> (f64, f64) {
    apd_schedule_next(gamma, tau, mu)
}

/// The oracle verification suites over the zoo, as
/// `(suite, subject, value, threshold, passed)` tuples.
#[pyfunction]
#[pyo3(signature = (seed = 0))]
fn verify(py: Python<'_>, seed: u64) -> PyResult<Vec<(String, String, f64, f64, bool)>> {
    let lines = py.detach(|| zoo_suite(seed)).map_err(to_py_err)?;
    Ok(lines.into_iter().map(|l| (l.suite, l.subject, l.value, l.threshold, l.passed)).collect())
}

/// Execute a JSON run manifest (writing its output directory) and return
/// the run summary as JSON.
#[pyfunction]
fn run_manifest_json(py: Python<'_>, manifest: &str) -> PyResult<String> {
    let m: RunManifest = serde_json::from_str(manifest).map_err(|e| PyValueError::new_err(format!("manifest: {e}")))?;
    let summary = py.detach(|| run_manifest(&m)).map_err(to_py_err)?;
    serde_json::to_string(&summary).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
pub fn apd_saddle(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(schedule_next, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(run_manifest_json, m)?)?;
    Ok(())
}
