use std::process::Command;

fn qgibbs(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qgibbs")).args(args).output().expect("binary runs")
}

#[test]
fn estimate_is_byte_identical_for_a_seed() {
    let args = ["estimate", "--seed", "7", "--beta-grid", "0.5:1:2", "--eps", "0.1,0.2"];
    let (a, b) = (qgibbs(&args), qgibbs(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["reports"].as_array().unwrap().len(), 4);
}

#[test]
fn estimate_at_infinite_temperature_returns_dimension() {
    let out = qgibbs(&["estimate", "--beta-grid", "0:0:1", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(row[2], "8");
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("model.json");
    std::fs::write(&config, r#"{"n": 3, "J": 1.0, "g": 0.0, "boundary": "open"}"#).unwrap();
    let out = dir.path().join("z.csv");
    let status = qgibbs(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--format",
        "csv",
        "estimate",
        "--mode",
        "classical",
        "--eps",
        "0.05",
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with('#'));
    assert_eq!(text.lines().nth(1).unwrap(), "beta,eps,z_hat,z_oracle,rel_err,cost");
}

#[test]
fn config_errors_exit_with_two() {
    assert_eq!(qgibbs(&["estimate", "--beta-grid", "2:1:3"]).status.code(), Some(2));
    assert_eq!(qgibbs(&["estimate", "--mode", "annealing"]).status.code(), Some(2));
    assert_eq!(qgibbs(&["--config", "/nonexistent/model.json", "prepare"]).status.code(), Some(2));
    assert_eq!(qgibbs(&["estimate", "--mode", "classical"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"n": 2, "boundary": "twisted"}"#).unwrap();
    assert_eq!(qgibbs(&["--config", config.to_str().unwrap(), "prepare"]).status.code(), Some(2));
}

#[test]
fn verify_bounds_reports_and_reproduces() {
    let args = ["verify-bounds", "--trials", "20", "--scalar-pairs", "1000", "--contour-trials", "1", "--seed", "3"];
    let (a, b) = (qgibbs(&args), qgibbs(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["pass"], true);
    let empty = qgibbs(&["verify-bounds", "--trials", "0", "--scalar-pairs", "0", "--contour-trials", "0"]);
    assert_eq!(empty.status.code(), Some(0));
}

#[test]
fn figure1_csv_contract() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("chain.json");
    std::fs::write(&config, r#"{"n": 5}"#).unwrap();
    let out = qgibbs(&["--config", config.to_str().unwrap(), "figure1", "--beta-grid", "0:2:5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# "));
    assert_eq!(lines[1], "g_over_J,beta,alpha");
    assert_eq!(lines.len(), 2 + 15);
    assert!(lines[2..].iter().filter(|l| l.split(',').nth(1) == Some("0")).all(|l| l.ends_with(",0")));
}

#[test]
fn prepare_json_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("pair.json");
    std::fs::write(&config, r#"{"n": 2, "g_over_J": 1.0}"#).unwrap();
    let out = qgibbs(&["--config", config.to_str().unwrap(), "prepare", "--beta", "0.5", "--m", "6"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["fidelity"].as_f64().unwrap() > 0.95);
    assert!(v["diagnostics"]["cost"]["u_applications"].as_u64().unwrap() > 0);
    assert_eq!(v["levels"].as_array().unwrap().len(), 4);
}
