use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CONFIG: &str = r#"{
    "profiles": [
        {"catalog_size": 200, "zipf_exponent": 1.0, "cacheability": 0.6, "request_share": 0.6},
        {"catalog_size": 300, "zipf_exponent": 0.5, "cacheability": 0.9, "request_share": 0.4}
    ],
    "capacity": 100,
    "delta": 10,
    "lambda": 200,
    "duration": 20,
    "horizon_seconds": 10,
    "window_seconds": 5,
    "seed": 3
}"#;

fn edgecache(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgecache"))
        .args(args)
        .env_remove("EDGECACHE_OUT_DIR")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("scenario.json");
    fs::write(&path, text).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), CONFIG);
    let out_dir = dir.path().join("out");
    let out = edgecache(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--policy",
        "proportional",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("final_window_gain=0\n"));
    let csv = fs::read_to_string(out_dir.join("proportional.csv")).unwrap();
    assert_eq!(csv.lines().count(), 81);
    let summary = fs::read_to_string(out_dir.join("proportional.summary.txt")).unwrap();
    assert_eq!(summary, stdout(&out));
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), CONFIG);
    let run = |seed: &str, sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = edgecache(&[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            seed,
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        fs::read(out_dir.join("rl.csv")).unwrap()
    };
    assert_eq!(run("3", "a"), run("3", "b"));
    assert_ne!(run("3", "a"), run("4", "c"));
}

#[test]
fn output_directory_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), CONFIG);
    let env_dir = dir.path().join("from-env");
    let out = Command::new(env!("CARGO_BIN_EXE_edgecache"))
        .args(["run", "--config", config.to_str().unwrap(), "--policy", "uniform"])
        .env("EDGECACHE_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(env_dir.join("uniform.csv").exists());
}

#[test]
fn oracle_prints_the_references() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), CONFIG);
    let out = edgecache(&["oracle", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let value = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{key}=")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(value("proportional_expected_cost") > value("optimal_expected_cost"));
    assert!(text.contains("optimal_theta="));
    assert!(text.contains("uniform_expected_cost="));
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &CONFIG.replace("\"delta\": 10,", ""));
    let out_dir = dir.path().join("sweep");
    let out = edgecache(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--param",
        "K",
        "--values",
        "5e1,1e2",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(out_dir.join("sweep_K.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("K,50,"));
    assert!(rows[2].starts_with("K,100,"));
}

#[test]
fn checkpoint_and_resume_reproduce_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), CONFIG);
    let cfg = config.to_str().unwrap();
    let cp = dir.path().join("cp");
    let full_dir = dir.path().join("full");
    let out = edgecache(&[
        "run", "--config", cfg, "--out-dir", full_dir.to_str().unwrap(),
        "--checkpoint", "30", cp.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(cp.join("qtable.txt").exists());

    let tail_dir = dir.path().join("tail");
    let out = edgecache(&[
        "run", "--config", cfg, "--out-dir", tail_dir.to_str().unwrap(),
        "--resume", cp.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let full = fs::read_to_string(full_dir.join("rl.csv")).unwrap();
    let tail = fs::read_to_string(tail_dir.join("rl.csv")).unwrap();
    let full_rows: Vec<&str> = full.lines().skip(31).collect();
    let tail_rows: Vec<&str> = tail.lines().skip(1).collect();
    assert_eq!(full_rows, tail_rows);
}

#[test]
fn missing_config_flag_prints_usage() {
    let out = edgecache(&["run"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("Usage"));
}

#[test]
fn unknown_flag_is_rejected() {
    let out = edgecache(&["oracle", "--config", "x.json", "--bogus"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("--bogus"));
}

#[test]
fn invalid_config_names_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &CONFIG.replace("\"delta\": 10", "\"delta\": 7"));
    let out = edgecache(&["oracle", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("does not divide"), "{}", stderr(&out));
}

#[test]
fn unreadable_config_fails() {
    let out = edgecache(&["run", "--config", "/nonexistent/scenario.json"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("/nonexistent/scenario.json"));
}
