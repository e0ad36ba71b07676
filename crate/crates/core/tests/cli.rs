use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hemi_ns::io::{parse_multiplier_csv, read_trajectory_csv};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(command: &str, cfg: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hemi-ns"))
        .arg(command)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn zero_data_gives_zero_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("verify", &config("zero_verify.toml"), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let traj = read_trajectory_csv(&dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(traj.times.len(), 101);
    assert!(traj.coeffs.iter().flatten().all(|&c| c == 0.0));
    let text = std::fs::read_to_string(dir.path().join("multiplier.csv")).unwrap();
    let rows = parse_multiplier_csv(&text, "multiplier.csv").unwrap();
    assert!(!rows.is_empty() && rows.iter().all(|r| r.u_n == 0.0 && r.kappa == 0.0));
    for f in ["h_norm.svg", "kappa.svg", "report.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn sqrt_law_fails_the_sign_condition() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("check-law", &config("check_law_sqrt.toml"), dir.path());
    assert_eq!(out.status.code(), Some(1));
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("Violated"), "{report}");
    assert!(dir.path().join("envelope.svg").exists());
}

#[test]
fn decay_run_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("verify", &config("f3_decay.toml"), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let traj = read_trajectory_csv(&dir.path().join("trajectory.csv")).unwrap();
    let last = traj.coeffs.last().unwrap()[0];
    assert!(last > 0.0 && last < 1e-7);
}

#[test]
fn unknown_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "command = \"solve\"\nfixture = \"F3\"\n\n[time]\nstep_size = 0.01\n").unwrap();
    let out = run("solve", &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("step_size"), "{stderr}");
}

#[test]
fn missing_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("solve", &dir.path().join("absent.toml"), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_data_under_sign_law_stays_at_rounding_level() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("zero_verify.toml")).unwrap().replace("\"zero\"", "\"sign\"");
    let cfg = dir.path().join("sign.toml");
    std::fs::write(&cfg, text).unwrap();
    let out = run("verify", &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(0));
    let traj = read_trajectory_csv(&dir.path().join("out/trajectory.csv")).unwrap();
    assert!(traj.coeffs.iter().flatten().all(|c| c.abs() < 1e-30));
}
