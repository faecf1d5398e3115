//! End-to-end tests of the `ringcascade` binary: artifact layout,
//! reproducibility, verification exit codes, and error reporting.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ringcascade"))
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ringcascade-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn run_writes_artifacts_and_verify_accepts_them() {
    let dir = tmp_dir("run");
    let out = dir.join("a");
    run_ok(&[
        "run", "--model", "flattened", "--eps", "1", "--alpha", "0.2", "--m", "64", "--A", "5",
        "--t", "1.0", "--samples", "4", "--out", out.to_str().unwrap(),
    ]);
    let csv = out.join("trajectory.csv");
    assert!(csv.exists());
    assert!(out.join("events.json").exists());
    assert!(out.join("manifest.resolved").exists());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# ringcascade-csv v1\nt,k,x,gamma,zeta,b,S_k,B\n"));

    let verify = bin()
        .args(["verify", "cascade-identity", csv.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(verify.status.success());
    let printed = String::from_utf8_lossy(&verify.stdout);
    assert!(printed.contains("max cascade residual"));

    // an absurdly tight threshold flips the exit code to 2
    let strict = bin()
        .args([
            "verify",
            "cascade-identity",
            csv.to_str().unwrap(),
            "--threshold",
            "1e-30",
        ])
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(2));
}

#[test]
fn identical_manifests_reproduce_byte_identical_outputs() {
    let dir = tmp_dir("repro");
    let manifest = dir.join("run.conf");
    std::fs::write(
        &manifest,
        "[cascade]\nmodel = localized\neps = 1.0\nalpha = 0.5\nm = 32\nA = 5\n[profile]\nL = 50\n",
    )
    .unwrap();
    let (a, b) = (dir.join("a"), dir.join("b"));
    run_ok(&["run", "--manifest", manifest.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    run_ok(&["run", "--manifest", manifest.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    for file in ["trajectory.csv", "events.json", "manifest.resolved"] {
        let fa = std::fs::read(a.join(file)).unwrap();
        let fb = std::fs::read(b.join(file)).unwrap();
        assert_eq!(fa, fb, "{file} differs between identical runs");
    }
}

#[test]
fn coeffs_emits_versioned_table() {
    let dir = tmp_dir("coeffs");
    run_ok(&[
        "coeffs", "--L", "50", "--eta", "0.25", "--points", "32", "--out",
        dir.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(dir.join("coefficients.csv")).unwrap();
    assert!(text.starts_with("# ringcascade-csv v1\ngamma,lambda,lambda_prime,q,kappa\n"));
    assert_eq!(text.lines().count(), 2 + 32);
}

#[test]
fn dichotomy_sweep_reproduces_sign_change() {
    let dir = tmp_dir("sweep");
    let manifest = dir.join("sweep.conf");
    std::fs::write(
        &manifest,
        "kind = sweep\n[cascade]\nmodel = flattened\neps = 1.0\n[sweep]\nkind = dichotomy\nalpha_list = 0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45\nm = 256\nt = 1.0\nfit_k_min = 32\nfit_k_max = 256\nworkers = 2\n",
    )
    .unwrap();
    run_ok(&[
        "sweep", "--manifest", manifest.to_str().unwrap(), "--out", dir.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("dichotomy.json")).unwrap())
            .unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    // fitted exponent changes sign across alpha = 2/7
    for row in rows {
        let alpha = row["alpha"].as_f64().unwrap();
        let fitted = row["fitted_exponent"].as_f64().unwrap();
        if alpha <= 0.25 {
            assert!(fitted > 0.0, "alpha={alpha} fitted={fitted}");
        }
        if alpha >= 0.35 {
            assert!(fitted < 0.0, "alpha={alpha} fitted={fitted}");
        }
    }
    assert!(dir.join("dichotomy.txt").exists());
}

#[test]
fn sweep_rejects_empty_grid() {
    let dir = tmp_dir("emptygrid");
    let manifest = dir.join("sweep.conf");
    std::fs::write(
        &manifest,
        "kind = sweep\n[sweep]\nkind = dichotomy\nalpha_list =\n",
    )
    .unwrap();
    let out = bin()
        .args(["sweep", "--manifest", manifest.to_str().unwrap(), "--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error"), "stderr: {err}");
}

#[test]
fn config_errors_carry_location_diagnostics() {
    let dir = tmp_dir("badconf");
    let manifest = dir.join("bad.conf");
    std::fs::write(&manifest, "[cascade]\neps = not-a-number\n").unwrap();
    let out = bin()
        .args(["run", "--manifest", manifest.to_str().unwrap(), "--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.conf:2"), "stderr missing line info: {err}");
}

#[test]
fn lorentz_and_bs_check_reports() {
    let dir = tmp_dir("reports");
    run_ok(&[
        "lorentz", "--q", "2", "--lorentz-m", "6", "--lorentz-alpha", "0.6", "--cells", "12",
        "--dump-field", "true", "--out", dir.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("lorentz.json")).unwrap()).unwrap();
    assert_eq!(doc["per_ring"].as_array().unwrap().len(), 6);
    assert!(doc["total"].as_f64().unwrap() > 0.0);
    let field = std::fs::read_to_string(dir.join("field.csv")).unwrap();
    assert!(field.starts_with("# ringcascade-csv v1\nvalue,volume\n"));

    run_ok(&[
        "bs-check", "--rings", "2", "--tol", "1e-6", "--out", dir.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("bs_check.json")).unwrap())
            .unwrap();
    assert!(doc["moment_identity_rel_err"].as_f64().unwrap() < 1e-2);
    assert!(doc["annular_rel_err"].as_f64().unwrap() < 1e-6);
    let scan = std::fs::read_to_string(dir.join("velocity_scan.csv")).unwrap();
    assert!(scan.starts_with("# ringcascade-csv v1\nr_x,z_x,u_r,u_z,E_r,E_z\n"));
}

#[test]
fn events_json_has_stable_schema() {
    let dir = tmp_dir("events");
    run_ok(&[
        "run", "--model", "strong", "--eps", "0.5", "--alpha", "0", "--m", "2", "--A", "0.95",
        "--out", dir.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("events.json")).unwrap()).unwrap();
    assert_eq!(doc["schema"], "ringcascade-events v1");
    // strong two-ring oracle: t_N = 2 ln 2
    let t_n = doc["t_inflation"].as_f64().unwrap();
    assert!((t_n - 2.0 * std::f64::consts::LN_2).abs() < 1e-8);
    assert_eq!(doc["run"]["model"], "strong");
    assert!(doc["max_cascade_residual"].as_f64().unwrap() < 1e-7);
}

#[test]
fn unknown_command_fails_cleanly() {
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
