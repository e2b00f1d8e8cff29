//! Accelerated primal-dual methods for saddle problems
//! `min_x max_y f(x) + Phi(x, y) - h(y)` with nonlinear coupling.
//!
//! Layout:
//! - [`geometry`], [`prox`], [`oracle`]: domain types and exact prox maps.
//! - [`engine`]: the generic main step, the APD schedule and solver loop.
//! - [`backtrack`]: test functions and the line-search variants.
//! - [`conic`]: conic-constrained programs turned into saddle oracles.
//! - [`zoo`]: QCQP, kernel SVM, matrix games and datasets.
//! - [`harness`]: manifests, logging, verification suites and rate fits.

pub mod backtrack;
pub mod conic;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod oracle;
pub mod prox;
pub mod zoo;

pub use error::{Error, Result};
pub use geometry::{bregman_entropy, bregman_euclidean, BregmanGeometry, GeometryKind};
pub use oracle::{EvalCounters, Instrumented, LipschitzTriple, SaddleOracle};

/// Dense real vector used for every iterate.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix.
pub type Matrix = nalgebra::DMatrix<f64>;

/// Membership tolerance for feasibility checks.
pub const FEAS_TOL: f64 = 1e-10;
