//! Numerical oracle suites: gradients by central differences, the
//! three-point prox inequality, Moreau decompositions, projection sanity and
//! the step-size schedule identity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::engine::apd_schedule_next;
use crate::oracle::SaddleOracle;
use crate::{BregmanGeometry, GeometryKind, Result, Vector};

/// Worst relative error of `grad_x`/`grad_y` against central differences of
/// `phi` over `points`. Errors are measured entrywise in units of
/// `max(1, ||grad||_inf)`.
pub fn finite_diff_check(oracle: &dyn SaddleOracle, points: &[(Vector, Vector)], h_fd: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (x, y) in points {
        let gx = oracle.grad_x(x, y);
        let gy = oracle.grad_y(x, y);
        let sx = gx.amax().max(1.0);
        for i in 0..x.len() {
            let h = h_fd * x[i].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (oracle.phi(&xp, y) - oracle.phi(&xm, y)) / (2.0 * h);
            worst = worst.max((fd - gx[i]).abs() / sx);
        }
        let sy = gy.amax().max(1.0);
        for j in 0..y.len() {
            let h = h_fd * y[j].abs().max(1.0);
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[j] += h;
            ym[j] -= h;
            let fd = (oracle.phi(x, &yp) - oracle.phi(x, &ym)) / (2.0 * h);
            worst = worst.max((fd - gy[j]).abs() / sy);
        }
    }
    worst
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ProxReport {
    pub checks: usize,
    pub failures: usize,
    /// Largest violation `rhs - lhs` seen (negative when all hold strictly).
    pub worst: f64,
}

impl ProxReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }
    /// Counts a failed check unless every point has a finite value.
    fn in_domain(&mut self, pts: &[&Vector], value: &dyn Fn(&Vector) -> f64) -> bool {
        if pts.iter().all(|p| value(p).is_finite()) {
            return true;
        }
        self.checks += 1;
        self.failures += 1;
        self.worst = f64::INFINITY;
        false
    }

    fn record(&mut self, lhs: f64, rhs: f64, slack: f64) {
        self.checks += 1;
        let v = rhs - lhs;
        if self.checks == 1 || v > self.worst {
            self.worst = v;
        }
        if v > slack {
            self.failures += 1;
        }
    }
}

fn gauss(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    Vector::from_fn(n, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Three-point inequality for both prox maps at `samples` random
/// configurations. For `x+ = prox_f(xbar, g, tau)` and any `x` in `dom f`:
///
/// `F(x) + D(x, xbar)/tau >= F(x+) + D(x+, xbar)/tau + D(x, x+)/tau + mu/2 ||x - x+||^2`
///
/// with `F = f + <g, .>`, and the analogue for `prox_h` with `-<s, .>` and
/// no modulus. Entropy domains are sampled directly on the simplex; other
/// domains through the prox map of a random far-away point, and every prox
/// output outside its domain counts as a failure. The slack is `1e-9`
/// relative to the magnitudes involved.
pub fn prox_inequality_suite(oracle: &dyn SaddleOracle, samples: usize, seed: u64) -> Result<ProxReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = ProxReport::default();
    let (n, m) = (oracle.dim_x(), oracle.dim_y());
    let (gx, gy) = (oracle.geom_x(), oracle.geom_y());
    let mu = oracle.mu();
    let f = |v: &Vector| oracle.f_value(v);
    let h = |v: &Vector| oracle.h_value(v);
    for _ in 0..samples {
        let xbar = domain_sample(&mut rng, gx, n, |v, t| oracle.prox_f(v, &Vector::zeros(n), t))?;
        let g = gauss(&mut rng, n, 1.0);
        let tau = rng.random_range(0.01..2.0);
        let xp = oracle.prox_f(&xbar, &g, tau)?;
        let x = domain_sample(&mut rng, gx, n, |v, t| oracle.prox_f(v, &Vector::zeros(n), t))?;
        if !rep.in_domain(&[&xbar, &xp, &x], &f) {
            continue;
        }
        let lhs = f(&x) + g.dot(&x) + gx.distance(&x, &xbar)? / tau;
        let rhs = f(&xp) + g.dot(&xp) + gx.distance(&xp, &xbar)? / tau + gx.distance(&x, &xp)? / tau + 0.5 * mu * (&x - &xp).norm_squared();
        rep.record(lhs, rhs, 1e-9 * (1.0 + lhs.abs() + rhs.abs()));

        let ybar = domain_sample(&mut rng, gy, m, |v, t| oracle.prox_h(v, &Vector::zeros(m), t))?;
        let s = gauss(&mut rng, m, 1.0);
        let sigma = rng.random_range(0.01..2.0);
        let yp = oracle.prox_h(&ybar, &s, sigma)?;
        let y = domain_sample(&mut rng, gy, m, |v, t| oracle.prox_h(v, &Vector::zeros(m), t))?;
        if !rep.in_domain(&[&ybar, &yp, &y], &h) {
            continue;
        }
        let lhs = h(&y) - s.dot(&y) + gy.distance(&y, &ybar)? / sigma;
        let rhs = h(&yp) - s.dot(&yp) + gy.distance(&yp, &ybar)? / sigma + gy.distance(&y, &yp)? / sigma;
        rep.record(lhs, rhs, 1e-9 * (1.0 + lhs.abs() + rhs.abs()));
    }
    Ok(rep)
}

/// A random point of the domain: a random point of the simplex interior for
/// entropy, otherwise the prox image of a random Gaussian point.
fn domain_sample(
    rng: &mut ChaCha8Rng,
    geom: BregmanGeometry,
    dim: usize,
    prox: impl Fn(&Vector, f64) -> Result<Vector>,
) -> Result<Vector> {
    match geom.kind {
        GeometryKind::Entropy => {
            let w = Vector::from_fn(dim, |_, _| rng.random_range(-3.0f64..3.0).exp());
            let total = w.sum();
            Ok(w / total)
        }
        GeometryKind::Euclidean => {
            let scale = rng.random_range(0.1..5.0);
            let v = gauss(rng, dim, scale);
            prox(&v, rng.random_range(0.05..2.0))
        }
    }
}

/// A domain point usable as an anchor: the uniform vector for entropy,
/// otherwise the projection of the origin.
fn interior_point(geom: BregmanGeometry, dim: usize, project: impl Fn(&Vector) -> Result<Vector>) -> Result<Vector> {
    match geom.kind {
        GeometryKind::Entropy => Ok(Vector::from_element(dim, 1.0 / dim as f64)),
        GeometryKind::Euclidean => project(&Vector::zeros(dim)),
    }
}

/// Idempotence and nonexpansiveness of a Euclidean projection on random
/// pairs; returns the worst violation of either property.
pub fn projection_checks(project: &dyn Fn(&Vector) -> Result<Vector>, dim: usize, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let scale = rng.random_range(0.1..10.0);
        let u = gauss(&mut rng, dim, scale);
        let v = gauss(&mut rng, dim, scale);
        let pu = project(&u)?;
        let pv = project(&v)?;
        let ppu = project(&pu)?;
        worst = worst.max((&ppu - &pu).amax() / (1.0 + pu.amax()));
        worst = worst.max((&pu - &pv).norm() - (&u - &v).norm());
    }
    Ok(worst)
}

/// `max |v - P1(v) - P2(v)|` and `max |<P1(v), P2(v)>|` over random `v`,
/// for a pair of maps that should split space orthogonally (a cone and its
/// polar, or a box projection and the matching soft threshold).
pub fn moreau_check(p1: &dyn Fn(&Vector) -> Vector, p2: &dyn Fn(&Vector) -> Vector, dim: usize, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut split, mut orth) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let scale = rng.random_range(0.1..10.0);
        let v = gauss(&mut rng, dim, scale);
        let a = p1(&v);
        let b = p2(&v);
        split = split.max((&v - &a - &b).amax() / (1.0 + v.amax()));
        orth = orth.max(a.dot(&b).abs() / (1.0 + v.norm_squared()));
    }
    (split, orth)
}

/// Chain `steps` schedule updates from `(gamma0, tau0)` and compare
/// `theta_{k+1} = sigma_k / sigma_{k+1}` with `1 / sqrt(1 + mu tau_k)`;
/// returns the worst relative mismatch.
pub fn schedule_identity(mu: f64, tau0: f64, gamma0: f64, steps: usize) -> f64 {
    let (mut gamma, mut tau) = (gamma0, tau0);
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        let sigma = gamma * tau;
        let (g2, t2) = apd_schedule_next(gamma, tau, mu);
        let sigma2 = g2 * t2;
        let theta = sigma / sigma2;
        let closed = 1.0 / (1.0 + mu * tau).sqrt();
        worst = worst.max((theta - closed).abs() / closed);
        gamma = g2;
        tau = t2;
    }
    worst
}

/// One line of a verification run.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteLine {
    pub suite: String,
    pub subject: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl std::fmt::Display for SuiteLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<14} {:<28} {:.3e} (limit {:.0e})", self.suite, self.subject, self.value, self.threshold)
    }
}

fn line(suite: &str, subject: &str, value: f64, threshold: f64) -> SuiteLine {
    SuiteLine { suite: suite.into(), subject: subject.into(), value, threshold, passed: value <= threshold }
}

/// Every oracle in the problem zoo at desk size, named.
pub fn zoo_oracles(seed: u64) -> Result<Vec<(String, Box<dyn SaddleOracle>)>> {
    use crate::conic::build_saddle_from_conic;
    use crate::zoo::qcqp::qcqp_slater_bound;
    use crate::zoo::svm::build_svm_saddle_with;
    use crate::zoo::*;

    let mut out: Vec<(String, Box<dyn SaddleOracle>)> = Vec::new();
    for (n, m, sc) in [(20, 3, true), (10, 2, false)] {
        let conic = qcqp_to_conic(gen_qcqp(n, m, seed, sc)?);
        let b = qcqp_slater_bound(&conic)?.bound;
        let name = format!("qcqp n={n} m={m}{}", if sc { " sc" } else { "" });
        out.push((name, Box::new(build_saddle_from_conic(conic, Some(b), None)?)));
    }
    let data = blobs(40, 2, 4.0, seed).normalized();
    let kern = build_kernel_matrices(&data, &KernelSpec::standard_set())?;
    let train: Vec<usize> = (0..30).collect();
    let labels = Vector::from_iterator(30, train.iter().map(|&i| data.labels[i]));
    let l1 = KernelSvmInstance::new(&kern, &train, labels.clone(), SvmVariant::L1, Some(1.0), 0.0)?;
    let l2 = KernelSvmInstance::new(&kern, &train, labels, SvmVariant::L2, None, 1.0)?;
    out.push(("svm l1".into(), Box::new(build_svm_saddle(&l1)?)));
    out.push(("svm l2".into(), Box::new(build_svm_saddle(&l2)?)));
    out.push(("svm l2 entropy".into(), Box::new(build_svm_saddle_with(&l2, BregmanGeometry::ENTROPY)?)));
    out.push(("game rps".into(), Box::new(matrix_game(crate::harness::runner::rps()))));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = crate::Matrix::from_fn(4, 5, |_, _| rng.random_range(-1.0..1.0));
    out.push(("game 4x5 entropy".into(), Box::new(MatrixGame::with_geometry(a, BregmanGeometry::ENTROPY))));
    out.push(("bilinear box".into(), Box::new(BilinearBox::random(5, 4, seed, 0.5))));
    Ok(out)
}

fn sample_points(oracle: &dyn SaddleOracle, count: usize, seed: u64) -> Result<Vec<(Vector, Vector)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, m) = (oracle.dim_x(), oracle.dim_y());
    let ax = interior_point(oracle.geom_x(), n, |v| oracle.prox_f(v, &Vector::zeros(n), 1.0))?;
    let ay = interior_point(oracle.geom_y(), m, |v| oracle.prox_h(v, &Vector::zeros(m), 1.0))?;
    (0..count)
        .map(|_| {
            let x = oracle.prox_f(&ax, &gauss(&mut rng, n, 1.0), 0.5)?;
            let y = oracle.prox_h(&ay, &gauss(&mut rng, m, 1.0), 0.5)?;
            Ok((x, y))
        })
        .collect()
}

/// Finite differences, prox inequalities, Moreau splits, projection sanity
/// and the schedule identity over the whole zoo.
pub fn zoo_suite(seed: u64) -> Result<Vec<SuiteLine>> {
    use crate::conic::ConeSpec;
    use crate::prox::{project_box, project_box_hyperplane, project_orthant_ball, project_simplex};

    let mut lines = Vec::new();
    let oracles = zoo_oracles(seed)?;
    for (name, o) in &oracles {
        let pts = sample_points(o.as_ref(), 20, seed)?;
        lines.push(line("finite-diff", name, finite_diff_check(o.as_ref(), &pts, 1e-5), 1e-6));
        let rep = prox_inequality_suite(o.as_ref(), 100, seed)?;
        lines.push(SuiteLine {
            suite: "prox-ineq".into(),
            subject: name.clone(),
            value: rep.worst,
            threshold: 1e-9,
            passed: rep.passed(),
        });
        if o.geom_y().kind == GeometryKind::Euclidean {
            let m = o.dim_y();
            let proj = |v: &Vector| o.prox_h(&Vector::zeros(m), v, 1.0);
            lines.push(line("projection", &format!("{name} dual"), projection_checks(&proj, m, 100, seed)?, 1e-12));
        }
    }

    for (cname, cone, dim) in [("orthant", ConeSpec::NonnegOrthant, 6), ("second-order", ConeSpec::second_order(), 5)] {
        let (split, orth) = moreau_check(&|v| cone.project_dual(v), &|v| cone.project_minus(v), dim, 200, seed);
        lines.push(line("moreau", &format!("{cname} split"), split, 1e-12));
        lines.push(line("moreau", &format!("{cname} orthogonal"), orth, 1e-12));
        let pd = |v: &Vector| Ok(cone.project_dual(v));
        lines.push(line("projection", &format!("{cname} cone"), projection_checks(&pd, dim, 100, seed)?, 1e-12));
    }
    // box indicator and l1 norm are conjugate-paired: clip + soft-threshold = identity
    let r = 0.7;
    let clip = |v: &Vector| v.map(|e| e.clamp(-r, r));
    let soft = |v: &Vector| v.map(|e| e.signum() * (e.abs() - r).max(0.0));
    let (split, _) = moreau_check(&clip, &soft, 6, 200, seed);
    lines.push(line("moreau", "box / soft-threshold", split, 1e-12));

    let labels = Vector::from_fn(8, |i, _| if i % 3 == 0 { -1.0 } else { 1.0 });
    let projections: Vec<(&str, Box<dyn Fn(&Vector) -> Result<Vector>>, usize)> = vec![
        ("box", Box::new(|v: &Vector| project_box(v, -1.0, 2.0)), 6),
        ("simplex", Box::new(project_simplex), 6),
        ("box-hyperplane", Box::new(|v: &Vector| project_box_hyperplane(v, 1.0, &labels)), 8),
        ("orthant-hyperplane", Box::new(|v: &Vector| project_box_hyperplane(v, f64::INFINITY, &labels)), 8),
        ("orthant-ball", Box::new(|v: &Vector| Ok(project_orthant_ball(v, Some(2.0)))), 6),
    ];
    for (pname, p, dim) in &projections {
        lines.push(line("projection", pname, projection_checks(p.as_ref(), *dim, 200, seed)?, 1e-12));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mu = rng.random_range(0.0..10.0);
        let tau0 = rng.random_range(1e-3..1.0);
        let gamma0 = 10f64.powf(rng.random_range(-2.0..2.0));
        worst = worst.max(schedule_identity(mu, tau0, gamma0, 1000));
    }
    lines.push(line("schedule", "100 random chains", worst, 1e-12));
    Ok(lines)
}
