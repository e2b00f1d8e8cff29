mod common;

use std::path::Path;
use std::process::Command;

use apd_core::engine::{run_apd_with, IterView, MonitorOutput, SolveOptions, SolverConfig};
use apd_core::harness::rates::{rate_fit, rate_fit_points, Metric};
use apd_core::harness::*;
use apd_core::prox::project_box;
use apd_core::zoo::{gen_qcqp, matrix_game, qcqp_to_conic, BilinearBox, MatrixGame};
use apd_core::conic::build_saddle_from_conic;
use apd_core::{BregmanGeometry, Matrix, Result, SaddleOracle, Vector};
use common::{v, Corrupted, HalfSquareTimesY, ScalarBilinear};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn apd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_apd"))
}

fn rps() -> MatrixGame {
    matrix_game(Matrix::from_row_slice(3, 3, &[0.0, -1.0, 1.0, 1.0, 0.0, -1.0, -1.0, 1.0, 0.0]))
}

#[test]
fn grid_examples() {
    let (x, y, val) = grid_saddle_oracle(&ScalarBilinear { k: 1.0 }, &[(-1.0, 1.0)], &[(-1.0, 1.0)], 201).unwrap();
    assert!(x[0].abs() < 1e-12 && y[0].abs() < 1e-12 && val.abs() < 1e-12);
    let (x, _, val) = grid_saddle_oracle(&HalfSquareTimesY { rx: 1.0, ry: 1.0 }, &[(-1.0, 1.0)], &[(0.0, 1.0)], 201).unwrap();
    assert!(x[0].abs() < 1e-12 && val.abs() < 1e-12);
    assert!(grid_saddle_oracle(&BilinearBox::random(3, 2, 0, 0.0), &[(-1.0, 1.0); 3], &[(-1.0, 1.0); 2], 5).is_err());
    assert!(grid_saddle_oracle(&ScalarBilinear { k: 1.0 }, &[(1.0, -1.0)], &[(-1.0, 1.0)], 5).is_err());
}

/// 2x2 game in the first coordinates of both mixed strategies.
struct Embedded(Matrix);
impl SaddleOracle for Embedded {
    fn dim_x(&self) -> usize { 1 }
    fn dim_y(&self) -> usize { 1 }
    fn phi(&self, x: &Vector, y: &Vector) -> f64 {
        v(&[x[0], 1.0 - x[0]]).dot(&(&self.0 * v(&[y[0], 1.0 - y[0]])))
    }
    fn grad_x(&self, _: &Vector, _: &Vector) -> Vector { unimplemented!() }
    fn grad_y(&self, _: &Vector, _: &Vector) -> Vector { unimplemented!() }
    fn prox_f(&self, _: &Vector, _: &Vector, _: f64) -> Result<Vector> { unimplemented!() }
    fn prox_h(&self, _: &Vector, _: &Vector, _: f64) -> Result<Vector> { unimplemented!() }
    fn f_value(&self, _: &Vector) -> f64 { 0.0 }
    fn h_value(&self, _: &Vector) -> f64 { 0.0 }
}

#[test]
fn grid_matches_closed_form_two_by_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut done = 0;
    while done < 5 {
        let a = Matrix::from_fn(2, 2, |_, _| rng.random_range(-2.0..2.0));
        let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
        let den = p - q - r + s;
        // fully mixed equilibrium only when neither player has a dominant row or column
        let x = (s - r) / den;
        let y = (s - q) / den;
        if !(0.05..0.95).contains(&x) || !(0.05..0.95).contains(&y) {
            continue;
        }
        let value = (p * s - q * r) / den;
        let res = 2001;
        let (gx, gy, gv) = grid_saddle_oracle(&Embedded(a), &[(0.0, 1.0)], &[(0.0, 1.0)], res).unwrap();
        let h = 1.0 / (res - 1) as f64;
        assert!((gx[0] - x).abs() <= h && (gy[0] - y).abs() <= h);
        assert!((gv - value).abs() <= 4.0 * h);
        done += 1;
    }
}

#[test]
fn rate_fits() {
    let inv: Vec<(f64, f64)> = (1..=1000).map(|k| (k as f64, 1.0 / k as f64)).collect();
    assert!((rate_fit_points(&inv, 10.0, 1000.0).unwrap() + 1.0).abs() < 1e-6);
    let inv2: Vec<(f64, f64)> = (1..=1000).map(|k| (k as f64, 1.0 / (k * k) as f64)).collect();
    assert!((rate_fit_points(&inv2, 10.0, 1000.0).unwrap() + 2.0).abs() < 1e-6);

    // on a skew-symmetric game L(x, y*) - L(x*, y) vanishes identically at the
    // uniform saddle, so the slope is taken on the duality gap of the averages
    let g = rps();
    let lip = g.lipschitz().unwrap();
    let cfg = SolverConfig { max_outer: 10_000, ..SolverConfig::apd_recipe(&lip, lip.l_yx, 1.0) };
    let (u, _) = g.uniform_start();
    let monitor = |w: &IterView| MonitorOutput { subopt: Some(g.duality_gap(w.x_erg, w.y_erg)), infeas: None, stop: false };
    let opts = SolveOptions { reference: Some((u.clone(), u.clone())), monitor: Some(Box::new(monitor)), record_timing: false };
    let r = run_apd_with(&g, &cfg, &v(&[0.8, 0.1, 0.1]), &v(&[0.1, 0.1, 0.8]), opts).unwrap();
    assert!(r.records.iter().all(|x| x.gap.unwrap().abs() < 1e-12));
    let slope = rate_fit(&r.records, Metric::Subopt, (100, 10_000)).unwrap();
    assert!(slope <= -0.9, "slope {slope}");
}

#[test]
fn finite_differences_catch_faults() {
    let b = BilinearBox::new(Matrix::zeros(3, 3), Vector::zeros(3), Matrix::from_fn(2, 3, |i, j| (i + 2 * j) as f64 - 1.5), Vector::zeros(2), 1.0, 1.0, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pts: Vec<(Vector, Vector)> = (0..10)
        .map(|_| (Vector::from_fn(3, |_, _| rng.random_range(-1.0..1.0)), Vector::from_fn(2, |_, _| rng.random_range(-1.0..1.0))))
        .collect();
    assert!(finite_diff_check(&b, &pts, 1e-5) <= 1e-10);
    let inst = gen_qcqp(10, 2, 0, false).unwrap();
    let q = build_saddle_from_conic(qcqp_to_conic(inst), None, None).unwrap();
    let qpts: Vec<(Vector, Vector)> = (0..20)
        .map(|_| (Vector::from_fn(10, |_, _| rng.random_range(-1.0..1.0)), Vector::from_fn(2, |_, _| rng.random_range(0.0..2.0))))
        .collect();
    assert!(finite_diff_check(&q, &qpts, 1e-5) <= 1e-6);
    // errors are relative to max(1, |grad|_inf), so the bump is planted where gradients are O(1)
    let bad = Corrupted { inner: &b, grad_bump: 1e-3, lazy_prox: false };
    assert!(finite_diff_check(&bad, &pts, 1e-5) > 1e-4);
}

#[test]
fn prox_suite_cases() {
    // box prox: with x = x+ both sides coincide
    let o = HalfSquareTimesY { rx: 1.0, ry: 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let xbar = v(&[rng.random_range(-1.0..1.0)]);
        let g = v(&[rng.random_range(-5.0..5.0)]);
        let tau = rng.random_range(0.01..2.0);
        let xp = o.prox_f(&xbar, &g, tau).unwrap();
        assert_eq!(xp, project_box(&(&xbar - &g * tau), -1.0, 1.0).unwrap());
        let lhs = g.dot(&(&xp - &xp));
        let d = |a: &Vector, b: &Vector| 0.5 * (a - b).norm_squared();
        let rhs = (d(&xp, &xbar) - d(&xp, &xp) - d(&xp, &xbar)) / tau;
        assert!((lhs - rhs).abs() < 1e-12);
    }
    let ent = MatrixGame::with_geometry(Matrix::from_fn(4, 3, |i, j| (i as f64 - j as f64).sin()), BregmanGeometry::ENTROPY);
    let rep = prox_inequality_suite(&ent, 100, 3).unwrap();
    assert!(rep.passed() && rep.checks >= 100, "{rep:?}");
    let q = BilinearBox::random(4, 3, 1, 0.5);
    assert!(prox_inequality_suite(&q, 100, 4).unwrap().passed());
    let lazy = Corrupted { inner: &q, grad_bump: 0.0, lazy_prox: true };
    assert!(!prox_inequality_suite(&lazy, 100, 4).unwrap().passed());
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER);
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn col(rows: &[Vec<String>], name: &str) -> Vec<String> {
    let i = CSV_HEADER.split(',').position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].clone()).collect()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn check_log_consistency(dir: &Path, rep: usize) {
    let rows = read_csv(&dir.join(format!("rep_{rep:03}.csv")));
    let s = &summary(dir)["replications"][rep];
    assert_eq!(rows.len() as u64, s["iterations"].as_u64().unwrap());
    let ks: Vec<u64> = col(&rows, "k").iter().map(|x| x.parse().unwrap()).collect();
    assert!(ks.iter().enumerate().all(|(i, &k)| k == i as u64 + 1));
    let inner: u64 = col(&rows, "inner_steps").iter().map(|x| x.parse::<u64>().unwrap()).sum();
    assert_eq!(inner, s["prox_trials"].as_u64().unwrap());
    let last = rows.last().unwrap();
    let gx: u64 = col(std::slice::from_ref(last), "grad_x_evals")[0].parse().unwrap();
    let gy: u64 = col(std::slice::from_ref(last), "grad_y_evals")[0].parse().unwrap();
    // the tracker counts up to the last accepted step; the summary also sees any final evaluation
    assert!(gx <= s["evals"]["grad_x"].as_u64().unwrap() && gy <= s["evals"]["grad_y"].as_u64().unwrap());
    assert!(col(&rows, "elapsed_s").iter().all(String::is_empty));
}

#[test]
fn cli_qcqp_converges() {
    let dir = tempfile::tempdir().unwrap();
    let out = apd()
        .args(["solve-qcqp", "--n", "50", "--m", "5", "--tol", "1e-6", "--max-outer", "100000", "--reference", "long-run", "--monitor-every", "10", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path());
    let r = &s["replications"][0];
    assert_eq!(r["status"], "converged");
    assert!(r["final_subopt"].as_f64().unwrap() <= 1e-6);
    assert!(r["reference_lower_bound"].as_f64().is_some());
    check_log_consistency(dir.path(), 0);
}

#[test]
fn cli_rejects_invalid_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = apd()
        .args(["solve-game", "--delta", "0.5", "--c-alpha", "0.4", "--c-beta", "0.4", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("c_alpha + c_beta + delta <= 1"), "{err}");
    assert!(!dir.path().join("summary.json").exists());
}

#[test]
fn cli_parallel_matches_serial() {
    let base = ["solve-qcqp", "--n", "8", "--m", "2", "--reps", "10", "--max-outer", "300", "--tol", "0"];
    let serial = tempfile::tempdir().unwrap();
    let par = tempfile::tempdir().unwrap();
    let again = tempfile::tempdir().unwrap();
    for (dir, p) in [(&serial, "1"), (&par, "4"), (&again, "4")] {
        let out = apd().args(base).args(["--parallel", p, "--out"]).arg(dir.path()).output().unwrap();
        // tol = 0 never stops early, so every replication ends on its budget
        assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for r in 0..10 {
        let name = format!("rep_{r:03}.csv");
        let a = std::fs::read(serial.path().join(&name)).unwrap();
        assert_eq!(a, std::fs::read(par.path().join(&name)).unwrap(), "{name}");
        assert_eq!(a, std::fs::read(again.path().join(&name)).unwrap(), "{name}");
        check_log_consistency(par.path(), r);
    }
    let seeds: Vec<u64> = summary(par.path())["replications"].as_array().unwrap().iter().map(|r| r["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, (0..10).collect::<Vec<_>>());
    let a = std::fs::read(serial.path().join("rep_000.csv")).unwrap();
    assert_ne!(a, std::fs::read(serial.path().join("rep_001.csv")).unwrap());
}

#[test]
fn cli_config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "max-outer = 40\ntol = 0.0\nalgorithm = \"apd\"\nreps = 2\n").unwrap();
    let out_a = dir.path().join("a");
    let st = apd().args(["solve-game", "--config"]).arg(&cfg).arg("--out").arg(&out_a).status().unwrap();
    assert_eq!(st.code(), Some(2));
    assert_eq!(read_csv(&out_a.join("rep_000.csv")).len(), 40);
    assert!(out_a.join("rep_001.csv").exists());
    let s = summary(&out_a);
    assert_eq!(s["manifest"]["solver"]["algorithm"], "apd");
    // APD never backtracks
    check_log_consistency(&out_a, 0);
    assert_eq!(s["replications"][0]["evals"]["grad_y"].as_u64().unwrap(), 41);

    let out_b = dir.path().join("b");
    let st = apd().args(["solve-game", "--max-outer", "7", "--config"]).arg(&cfg).arg("--out").arg(&out_b).status().unwrap();
    assert_eq!(st.code(), Some(2));
    assert_eq!(read_csv(&out_b.join("rep_000.csv")).len(), 7);

    std::fs::write(&cfg, "max-outr = 40\n").unwrap();
    let out = apd().args(["solve-game", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "parse");
}

#[test]
fn cli_timing_and_rates() {
    let dir = tempfile::tempdir().unwrap();
    let st = apd()
        .args(["solve-game", "--algorithm", "apd", "--max-outer", "5000", "--tol", "0", "--reference", "long-run", "--record-timing", "true", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
    let csv = dir.path().join("rep_000.csv");
    let rows = read_csv(&csv);
    assert!(col(&rows, "elapsed_s").iter().all(|x| x.parse::<f64>().is_ok()));
    let out = apd().arg("rates").arg(&csv).args(["--metric", "subopt", "--k-min", "100"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let slope: f64 = text.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(slope <= -0.9, "{text}");
}

#[test]
fn cli_verify_passes() {
    let out = apd().args(["verify", "--seed", "3"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() > 10);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}
