use std::path::{Path, PathBuf};
use std::process::Command;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn contagion() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_contagion"));
    cmd.env_remove("CONTAGION_LOG");
    cmd
}

#[test]
fn full_run_writes_reports_and_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let out = contagion()
        .arg("--banks")
        .arg(data("roster48_synthetic.csv"))
        .arg("--scenario")
        .arg(data("adverse_synthetic.csv"))
        .args([
            "--methods",
            "anan,maxe",
            "--theta",
            "0.971",
            "--beta",
            "0.3,0.8",
        ])
        .args(["--export", "graphml", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty(), "results go to files only");
    for name in [
        "report.json",
        "network_stats.csv",
        "hierarchies.csv",
        "exposures_anan.graphml",
        "interdependency_maxe.graphml",
    ] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let stats = std::fs::read_to_string(dir.path().join("network_stats.csv")).unwrap();
    assert_eq!(stats.lines().count(), 3);
}

#[test]
fn invalid_theta_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let status = contagion()
        .arg("--banks")
        .arg(data("toy2.csv"))
        .args(["--theta", "0"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&status.stderr).contains("theta"));
}

#[test]
fn missing_roster_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let status = contagion()
        .arg("--banks")
        .arg(dir.path().join("nope.csv"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(4));
}

#[test]
fn unknown_method_is_rejected_by_the_parser() {
    let status = contagion()
        .args(["--banks", "x.csv", "--methods", "ras"])
        .output()
        .unwrap();
    assert!(!status.status.success());
    assert!(String::from_utf8_lossy(&status.stderr).contains("ras"));
}
