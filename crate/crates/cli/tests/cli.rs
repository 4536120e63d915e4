use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stefan-front"))
}

#[test]
fn simulate_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    fs::write(
        &cfg,
        r#"{"command": "simulate", "nonlinearity": {"name": "cubic_bistable", "theta": 0.25},
            "solver": {"n": 41, "t_max": 1.0}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = bin().arg("simulate").arg("--config").arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    for f in ["config.json", "fronts.csv", "snapshots.csv", "report.json", "verdict.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn bad_theta_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    fs::write(&cfg, r#"{"command": "simulate", "nonlinearity": {"name": "combustion", "theta": 1.5}}"#).unwrap();
    let out = bin().arg("simulate").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("theta"));
}

#[test]
fn missing_file_exits_one() {
    let status = bin().args(["semiwave", "--config", "/nonexistent/job.json"]).status().unwrap();
    assert_eq!(status.code(), Some(1));
}
