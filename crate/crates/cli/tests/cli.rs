//! End-to-end tests of the `capspec` binary: report shape, exit codes,
//! determinism of stdout, and the `--out` / `--resolution-scale` flags.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_capspec"))
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&output.stdout)
        )
    })
}

/// Hemisphere config at test-sized resolutions.
fn hemisphere_config(dir: &std::path::Path, sl_grid: usize, rings: usize) -> PathBuf {
    let path = dir.join("hemisphere.json");
    fs::write(
        &path,
        format!(
            r#"{{"domain": {{"coefficients": [[1.0, 0.0]]}},
                "resolutions": {{"rings": {rings}, "sl_grid": {sl_grid},
                                 "n_r": 128, "n_theta": 128}}}}"#
        ),
    )
    .unwrap();
    path
}

#[test]
fn verify_hemisphere_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = hemisphere_config(dir.path(), 512, 32);
    let out = dir.path().join("artifacts");
    let output = run(&[
        "verify",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");

    let report = stdout_json(&output);
    assert_eq!(report["verdict"], Value::Bool(true));
    assert_eq!(report["pole_winding"], 1);
    assert!((report["mu2_domain"].as_f64().unwrap() - 2.0).abs() < 1e-2);
    assert!((report["kappa1"].as_f64().unwrap() - 2.0).abs() < 1e-4);
    assert_eq!(report["near_equality"][0], Value::Bool(true));
    assert_eq!(report["near_equality"][1], Value::Bool(true));

    // The persisted report is the same bytes as stdout.
    let persisted = fs::read(out.join("verify.json")).unwrap();
    assert_eq!(persisted, output.stdout);
}

#[test]
fn verify_stdout_is_deterministic_and_untimed() {
    let dir = tempfile::tempdir().unwrap();
    let config = hemisphere_config(dir.path(), 128, 8);
    let first = run(&["verify", config.to_str().unwrap()]);
    let second = run(&["verify", config.to_str().unwrap()]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    let stdout = String::from_utf8(first.stdout).unwrap();
    let stderr = String::from_utf8(first.stderr).unwrap();
    assert!(!stdout.contains("timing"), "timings belong on stderr");
    assert!(stderr.contains("timing:"));
}

#[test]
fn malformed_or_missing_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{broken").unwrap();
    let output = run(&["verify", bad.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(!output.stderr.is_empty(), "diagnostic expected on stderr");

    let missing = dir.path().join("nope.json");
    let output = run(&["verify", missing.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn resolution_scale_rescales_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = hemisphere_config(dir.path(), 512, 32);
    let output = run(&[
        "verify",
        config.to_str().unwrap(),
        "--resolution-scale",
        "0.5",
    ]);
    assert!(output.status.success(), "{output:?}");
    let report = stdout_json(&output);
    assert_eq!(report["resolutions"]["rings"], 16);
    assert_eq!(report["resolutions"]["sl_grid"], 256);
}

#[test]
fn cap_reports_hemisphere_modes() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&[
        "cap",
        "--radius",
        "1.5707963267948966",
        "--modes",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let report = stdout_json(&output);
    assert!((report["mu2"].as_f64().unwrap() - 2.0).abs() < 1e-4);
    assert!(report["mode_gap"].as_f64().unwrap() > 0.0);

    let csv = fs::read_to_string(dir.path().join("cap_modes.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("mode,j,eigenvalue,boundary_value"));
    assert_eq!(lines.count(), 9, "three modes, three eigenvalues each");
}

#[test]
fn radial_solves_at_a_prescribed_pole() {
    let dir = tempfile::tempdir().unwrap();
    let config = hemisphere_config(dir.path(), 256, 8);
    let output = run(&[
        "radial",
        config.to_str().unwrap(),
        "--pole",
        "0.0,0.0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let report = stdout_json(&output);
    let kappa1 = report["eigenvalues"][0].as_f64().unwrap();
    assert!((kappa1 - 2.0).abs() < 1e-3, "kappa1 = {kappa1}");

    let csv = fs::read_to_string(dir.path().join("radial_modes.csv")).unwrap();
    assert!(csv.starts_with("center,width,f1,f2,f3,f4\n"));
    assert_eq!(csv.lines().count(), 257);
}

#[test]
fn neumann2d_reports_spectrum_with_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let config = hemisphere_config(dir.path(), 128, 16);
    let output = run(&["neumann2d", config.to_str().unwrap()]);
    assert!(output.status.success(), "{output:?}");
    let report = stdout_json(&output);
    let ev: Vec<f64> = report["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(ev[0].abs() < 1e-6, "zero mode, got {}", ev[0]);
    assert!((ev[1] - 2.0).abs() < 5e-2, "mu2 = {}", ev[1]);
    for r in report["residuals"].as_array().unwrap() {
        assert!(r.as_f64().unwrap() < 1e-8);
    }
}

#[test]
fn barycenter_centers_the_hemisphere() {
    let dir = tempfile::tempdir().unwrap();
    let config = hemisphere_config(dir.path(), 256, 8);
    let output = run(&["barycenter", config.to_str().unwrap()]);
    assert!(output.status.success(), "{output:?}");
    let report = stdout_json(&output);
    assert!(report["balanced_pole"][0].as_f64().unwrap().abs() < 1e-6);
    assert!(report["balanced_pole"][1].as_f64().unwrap().abs() < 1e-6);
    assert_eq!(report["winding"], 1);
}

#[test]
fn steklov_errors_shrink_toward_the_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let config = hemisphere_config(dir.path(), 256, 8);
    let output = run(&[
        "steklov",
        config.to_str().unwrap(),
        "--magnitudes",
        "0.9,0.99",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let report = stdout_json(&output);
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for sector in [1, 2] {
        let errors: Vec<f64> = rows
            .iter()
            .filter(|r| r["sector"] == sector)
            .map(|r| r["abs_error"].as_f64().unwrap())
            .collect();
        assert!(errors[1] < errors[0], "sector {sector}: {errors:?}");
    }
    assert!(dir.path().join("steklov_rows.csv").exists());
}

#[test]
fn sweep_monotone_never_increases() {
    let dir = tempfile::tempdir().unwrap();
    let config = hemisphere_config(dir.path(), 256, 8);
    let output = run(&[
        "sweep-monotone",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let report = stdout_json(&output);
    let kappas: Vec<f64> = report["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["kappa1"].as_f64().unwrap())
        .collect();
    assert_eq!(kappas.len(), 11);
    for pair in kappas.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-10);
    }
    assert!(report["max_midpoint_deviation"].as_f64().unwrap() < 1e-3);
    assert!(dir.path().join("sweep_rows.csv").exists());
    assert!(dir.path().join("sweep_midpoints.csv").exists());
}

#[test]
fn profile_distinguishes_centered_from_offset_poles() {
    let dir = tempfile::tempdir().unwrap();
    let config = hemisphere_config(dir.path(), 512, 8);
    let centered = run(&["profile", config.to_str().unwrap(), "--pole", "0.0,0.0"]);
    assert!(centered.status.success(), "{centered:?}");
    let report = stdout_json(&centered);
    assert!(report["max_relative_excess"].as_f64().unwrap() < 1e-3);

    let offset = run(&["profile", config.to_str().unwrap(), "--pole", "0.4,0.0"]);
    assert!(offset.status.success(), "{offset:?}");
    let report = stdout_json(&offset);
    assert!(report["max_relative_excess"].as_f64().unwrap() > 0.1);
}
