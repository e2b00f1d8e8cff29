//! Run configuration, logging, verification suites and rate fits.

pub mod grid;
pub mod manifest;
pub mod rates;
pub mod runner;
pub mod verify;

pub use grid::grid_saddle_oracle;
pub use manifest::{DataSource, GameSpec, ProblemSpec, ReferencePolicy, RunManifest};
pub use rates::{rate_fit, rate_fit_points, read_csv_column, Metric};
pub use runner::{records_to_csv, run_manifest, run_replication, ConvergenceLog, RunSummary, CSV_HEADER};
pub use verify::{finite_diff_check, moreau_check, projection_checks, prox_inequality_suite, schedule_identity, ProxReport};
