//! Run manifests: what to solve, how, how often and where to write.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::SolverConfig;
use crate::zoo::{KernelSpec, SvmVariant};
use crate::{Error, GeometryKind, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    /// Two Gaussian clouds, `separation` standard deviations apart.
    Blobs { n_points: usize, dim: usize, separation: f64 },
    Csv { path: PathBuf, label_column: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GameSpec {
    /// Rock-paper-scissors.
    Rps,
    /// Entries uniform on `[-1, 1]`.
    Random { n: usize, m: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    Qcqp {
        n: usize,
        m: usize,
        #[serde(default)]
        strongly_convex: bool,
        /// Dual radius `B`; computed from a Slater point when absent.
        #[serde(default)]
        dual_bound: Option<f64>,
        /// Cap margin; defaults to `B`.
        #[serde(default)]
        kappa: Option<f64>,
    },
    Svm {
        data: DataSource,
        /// The first `n_train` rows train, the rest test.
        n_train: usize,
        variant: SvmVariant,
        #[serde(default)]
        c: Option<f64>,
        #[serde(default)]
        lambda: f64,
        #[serde(default)]
        kernels: Option<Vec<KernelSpec>>,
        #[serde(default = "euclidean")]
        geometry: GeometryKind,
    },
    Game {
        game: GameSpec,
        #[serde(default = "euclidean")]
        geometry: GeometryKind,
    },
}

fn euclidean() -> GeometryKind {
    GeometryKind::Euclidean
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferencePolicy {
    #[default]
    None,
    /// APDB with 100x the outer budget and 1e-4x the tolerance.
    LongRun,
    /// A known saddle point.
    Injected { x: Vec<f64>, y: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub problem: ProblemSpec,
    /// Replication `r` uses seed `seed + r`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub reference: ReferencePolicy,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default = "one")]
    pub parallelism: usize,
    #[serde(default)]
    pub record_timing: bool,
    /// Evaluate problem metrics every this many iterations.
    #[serde(default = "one")]
    pub monitor_every: usize,
}

fn one() -> usize {
    1
}

impl RunManifest {
    pub fn new(problem: ProblemSpec, solver: SolverConfig, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            problem,
            seed: 0,
            solver,
            output_dir: output_dir.into(),
            reference: ReferencePolicy::None,
            replications: 1,
            parallelism: 1,
            record_timing: false,
            monitor_every: 1,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn replication_seed(&self, r: usize) -> u64 {
        self.seed.wrapping_add(r as u64)
    }

    /// Structural checks, solver constraints and a writable output directory.
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.parallelism == 0 {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        if self.monitor_every == 0 {
            return Err(Error::Config("monitor_every must be at least 1".into()));
        }
        self.solver.validate(None)?;
        match &self.problem {
            ProblemSpec::Qcqp { n, m, .. } if *n < 2 || *m < 1 => {
                return Err(Error::Config(format!("QCQP needs n >= 2 and m >= 1, got n={n}, m={m}")));
            }
            ProblemSpec::Svm { n_train, data, .. } => {
                if *n_train < 2 {
                    return Err(Error::Config("SVM needs at least two training points".into()));
                }
                if let DataSource::Blobs { n_points, .. } = data {
                    if n_points <= n_train {
                        return Err(Error::Config("blobs need more points than n_train to leave a test split".into()));
                    }
                }
            }
            ProblemSpec::Game { game: GameSpec::Random { n, m }, .. } if *n == 0 || *m == 0 => {
                return Err(Error::Config("random game needs positive dimensions".into()));
            }
            _ => {}
        }
        std::fs::create_dir_all(&self.output_dir)?;
        let probe = self.output_dir.join(".write_probe");
        std::fs::write(&probe, b"")?;
        std::fs::remove_file(&probe)?;
        Ok(())
    }
}
