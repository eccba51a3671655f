use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ris_secrecy::cli::{parse_config, CommandKind};
use ris_secrecy::experiments::{Scheme, SweepResultRow, CSV_HEADER};

fn inputs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../inputs")
}

fn bin(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ris-secrecy"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env_remove("RIS_SECRECY_OUT_DIR")
        .output()
        .unwrap()
}

fn read_rows(path: &Path) -> Vec<SweepResultRow> {
    csv::Reader::from_path(path)
        .unwrap()
        .deserialize()
        .map(Result::unwrap)
        .collect()
}

#[test]
fn no_arguments_prints_usage() {
    let out = Command::new(env!("CARGO_BIN_EXE_ris-secrecy")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn missing_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["optimize", "--scenario", "/nonexistent/scenario.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not exist"));
    let out = bin(&["sweep-power"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_scenario_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"alice\": [0, 0]}").unwrap();
    let out = bin(&["optimize", "--scenario", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn optimize_writes_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = inputs().join("distance.json");
    let out = bin(
        &["optimize", "--scenario", scenario.to_str().unwrap(), "--plot"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("optimize.csv");
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let rows = read_rows(&csv);
    assert_eq!(rows.iter().map(|r| r.scheme).collect::<Vec<_>>(), Scheme::ALL.to_vec());
    assert!(rows[0].p1_w.is_some() && rows[0].iters.is_some());
    assert!(rows[2].p1_w.is_none());
    for r in &rows {
        assert!(r.rate_nats >= 0.0);
        assert!((r.rate_bits - r.rate_nats / std::f64::consts::LN_2).abs() < 1e-12);
    }
    assert!(fs::read_to_string(dir.path().join("optimize.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn sweeps_are_reproducible() {
    let scenario = inputs().join("eves.json");
    let args = [
        "sweep-eves",
        "--scenario",
        scenario.to_str().unwrap(),
        "--trials",
        "20",
        "--seed",
        "9",
    ];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(bin(&args, a.path()).status.success());
    assert!(bin(&args, b.path()).status.success());
    let ca = fs::read(a.path().join("sweep_eves.csv")).unwrap();
    assert_eq!(ca, fs::read(b.path().join("sweep_eves.csv")).unwrap());
    let rows = read_rows(&a.path().join("sweep_eves.csv"));
    assert_eq!(rows.len(), 6 * 3);

    let c = tempfile::tempdir().unwrap();
    let other = [
        "sweep-eves",
        "--scenario",
        scenario.to_str().unwrap(),
        "--trials",
        "20",
        "--seed",
        "10",
    ];
    assert!(bin(&other, c.path()).status.success());
    assert_ne!(ca, fs::read(c.path().join("sweep_eves.csv")).unwrap());
}

#[test]
fn csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = inputs().join("power.json");
    assert!(
        bin(&["sweep-power", "--scenario", scenario.to_str().unwrap()], dir.path())
            .status
            .success()
    );
    let path = dir.path().join("sweep_power.csv");
    let rows = read_rows(&path);
    assert_eq!(rows.len(), 26 * 3);
    let again = ris_secrecy::cli::rows_to_csv(&rows).unwrap();
    assert_eq!(again, fs::read(&path).unwrap());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    let scenario = inputs().join("distance.json");
    fs::write(
        &config,
        format!(
            "{{\"scenario\": {:?}, \"out_dir\": \"results\", \"seed\": 3, \"tolerance\": 1e-6, \"plot\": true}}",
            scenario.to_str().unwrap()
        ),
    )
    .unwrap();
    let c = config.to_str().unwrap();
    let cfg = parse_config(["ris-secrecy", "sweep-eves", "--config", c]).unwrap();
    assert_eq!(cfg.command, CommandKind::SweepEves);
    assert_eq!(cfg.out_dir, dir.path().join("results"));
    assert_eq!(cfg.seed, Some(3));
    assert_eq!(cfg.optimizer.tolerance, 1e-6);
    assert!(cfg.plot);

    let cfg = parse_config([
        "ris-secrecy",
        "sweep-eves",
        "--config",
        c,
        "--seed",
        "4",
        "--tolerance",
        "1e-8",
        "--plot=false",
        "--out-dir",
        "elsewhere",
    ])
    .unwrap();
    assert_eq!(cfg.seed, Some(4));
    assert_eq!(cfg.optimizer.tolerance, 1e-8);
    assert!(!cfg.plot);
    assert_eq!(cfg.out_dir, PathBuf::from("elsewhere"));

    fs::write(&config, "{\"seeds\": 3}").unwrap();
    assert!(parse_config(["ris-secrecy", "optimize", "--config", c]).is_err());
}

#[test]
fn verify_security_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let channel = inputs().join("bsc_decay.json");
    let out = bin(&["verify-security", "--channel", channel.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("security_decay.csv").is_file());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("security_decay_summary.json")).unwrap()).unwrap();
    assert!(summary.get("summaries").is_some());
}
