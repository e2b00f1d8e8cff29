use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use apd_core::engine::{Algorithm, EkVariant, SolverConfig};
use apd_core::harness::manifest::{DataSource, GameSpec, ProblemSpec, ReferencePolicy, RunManifest};
use apd_core::harness::rates::{rate_fit_points, read_csv_column};
use apd_core::harness::runner::run_manifest;
use apd_core::harness::verify::zoo_suite;
use apd_core::zoo::SvmVariant;
use apd_core::{Error, GeometryKind, Result};

#[derive(Parser)]
#[command(name = "apd", about = "Accelerated primal-dual saddle-point solvers")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Random convex QCQP over a box.
    SolveQcqp {
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        m: usize,
        #[arg(long)]
        strongly_convex: bool,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Multiple-kernel SVM on synthetic blobs or a CSV file.
    SolveSvm {
        /// Header-first CSV; blobs are generated when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "label")]
        label_column: String,
        #[arg(long, default_value_t = 80)]
        points: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 4.0)]
        separation: f64,
        #[arg(long, default_value_t = 60)]
        n_train: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::L2)]
        variant: VariantArg,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Entropy geometry on the kernel simplex.
        #[arg(long)]
        entropy: bool,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Matrix game on the simplices.
    SolveGame {
        #[arg(long, value_enum, default_value_t = GameArg::Rps)]
        game: GameArg,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long)]
        entropy: bool,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Oracle verification suites over the problem zoo.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Log-log slope fits on run CSVs.
    Rates {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        #[arg(long, default_value = "gap")]
        metric: String,
        #[arg(long)]
        k_min: Option<f64>,
        #[arg(long)]
        k_max: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    L1,
    L2,
}

#[derive(Clone, Copy, ValueEnum)]
enum GameArg {
    Rps,
    Random,
}

#[derive(Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum RefArg {
    None,
    LongRun,
}

/// Solver and run settings. Every field may also come from `--config`;
/// flags given on the command line win.
#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
struct RunFlags {
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    c_alpha: Option<f64>,
    #[arg(long)]
    c_beta: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    tau_bar: Option<f64>,
    #[arg(long)]
    gamma0: Option<f64>,
    #[arg(long)]
    tau_max: Option<f64>,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long)]
    max_inner: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    parallel: Option<usize>,
    /// exact | tilde
    #[arg(long)]
    ek_variant: Option<String>,
    /// apd | apdb | apdb-switched
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    restart_period: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    reference: Option<RefArg>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    record_timing: Option<bool>,
    #[arg(long)]
    monitor_every: Option<usize>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RunFlags {
    /// File values first, then the flags actually given.
    fn merged(self) -> Result<RunFlags> {
        let mut base = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                toml::from_str::<RunFlags>(&text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?
            }
            None => RunFlags::default(),
        };
        let f = self;
        overlay!(
            base, f, mu, delta, c_alpha, c_beta, eta, tau_bar, gamma0, tau_max, max_outer, max_inner, tol, seed, reps,
            parallel, ek_variant, algorithm, restart_period, out, reference, record_timing, monitor_every
        );
        Ok(base)
    }

    fn manifest(self, problem: ProblemSpec) -> Result<RunManifest> {
        let f = self.merged()?;
        let algorithm: Algorithm = f.algorithm.as_deref().unwrap_or("apdb").parse()?;
        let mut cfg = SolverConfig { algorithm, ..SolverConfig::backtracking_defaults(false) };
        if algorithm == Algorithm::ApdbSwitched && f.c_beta.is_none() {
            cfg.c_alpha = 0.49;
            cfg.c_beta = 0.49;
        }
        cfg.mu = f.mu;
        if let Some(v) = f.delta {
            cfg.delta = v;
        }
        if let Some(v) = f.c_alpha {
            cfg.c_alpha = v;
        }
        if let Some(v) = f.c_beta {
            cfg.c_beta = v;
        }
        if let Some(v) = f.eta {
            cfg.eta = v;
        }
        if let Some(v) = f.tau_bar {
            cfg.tau0 = v;
        }
        if f.gamma0.is_some() {
            cfg.gamma0 = f.gamma0;
        }
        cfg.tau_max = f.tau_max;
        if let Some(v) = f.max_outer {
            cfg.max_outer = v;
        }
        if let Some(v) = f.max_inner {
            cfg.max_inner = v;
        }
        if let Some(v) = f.tol {
            cfg.tol = v;
        }
        if let Some(s) = &f.ek_variant {
            cfg.ek_variant = s.parse::<EkVariant>()?;
        }
        cfg.restart_period = f.restart_period;
        let mut m = RunManifest::new(problem, cfg, f.out.unwrap_or_else(|| PathBuf::from("apd_out")));
        m.seed = f.seed.unwrap_or(0);
        m.replications = f.reps.unwrap_or(1);
        m.parallelism = f.parallel.unwrap_or(1);
        m.record_timing = f.record_timing.unwrap_or(false);
        m.monitor_every = f.monitor_every.unwrap_or(1);
        m.reference = match f.reference {
            Some(RefArg::LongRun) => ReferencePolicy::LongRun,
            _ => ReferencePolicy::None,
        };
        Ok(m)
    }
}

fn geometry(entropy: bool) -> GeometryKind {
    if entropy {
        GeometryKind::Entropy
    } else {
        GeometryKind::Euclidean
    }
}

fn solve(run: RunFlags, problem: ProblemSpec) -> Result<ExitCode> {
    let manifest = run.manifest(problem)?;
    let summary = run_manifest(&manifest)?;
    for r in &summary.replications {
        println!(
            "rep {:>3} seed {:>6} {:?} iterations {} grad evals {} gap {} subopt {} infeas {}",
            r.replication,
            r.seed,
            r.status,
            r.iterations,
            r.evals.grad_x + r.evals.grad_y,
            fmt(r.final_gap),
            fmt(r.final_subopt),
            fmt(r.final_infeas)
        );
        if let Some(a) = r.test_accuracy {
            println!("        test accuracy {a:.4}");
        }
        if let Some(msg) = &r.message {
            println!("        {msg}");
        }
    }
    println!("wrote {}", manifest.output_dir.display());
    Ok(if summary.all_converged { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn fmt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::SolveQcqp { n, m, strongly_convex, run } => {
            solve(run, ProblemSpec::Qcqp { n, m, strongly_convex, dual_bound: None, kappa: None })
        }
        Cmd::SolveSvm { data, label_column, points, dim, separation, n_train, variant, c, lambda, entropy, run } => {
            let data = match data {
                Some(path) => DataSource::Csv { path, label_column },
                None => DataSource::Blobs { n_points: points, dim, separation },
            };
            let (variant, c, lambda) = match variant {
                VariantArg::L1 => (SvmVariant::L1, Some(c.unwrap_or(1.0)), 0.0),
                VariantArg::L2 => (SvmVariant::L2, c, lambda),
            };
            let problem =
                ProblemSpec::Svm { data, n_train, variant, c, lambda, kernels: None, geometry: geometry(entropy) };
            solve(run, problem)
        }
        Cmd::SolveGame { game, n, m, entropy, run } => {
            let game = match game {
                GameArg::Rps => GameSpec::Rps,
                GameArg::Random => GameSpec::Random { n, m },
            };
            solve(run, ProblemSpec::Game { game, geometry: geometry(entropy) })
        }
        Cmd::Verify { seed } => {
            let lines = zoo_suite(seed)?;
            for l in &lines {
                println!("{l}");
            }
            Ok(if lines.iter().all(|l| l.passed) { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Rates { csv, metric, k_min, k_max } => {
            for path in csv {
                let pts = read_csv_column(&path, &metric)?;
                let kmax = k_max.unwrap_or_else(|| pts.last().map_or(1.0, |p| p.0));
                let kmin = k_min.unwrap_or((kmax / 10.0).max(1.0));
                let slope = rate_fit_points(&pts, kmin, kmax)?;
                println!("{} {metric} slope over [{kmin}, {kmax}]: {slope:.4}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            let kind = match &e {
                Error::Config(_) | Error::Misconfigured(_) => "config",
                Error::Parse(_) => "parse",
                Error::Io(_) => "io",
                _ => "solver",
            };
            eprintln!("{}", serde_json::json!({ "error": kind, "message": e.to_string() }));
            ExitCode::from(1)
        }
    }
}
