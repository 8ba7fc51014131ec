use std::fs;
use std::path::Path;
use std::process::Command;

use sha2::{Digest, Sha256};

fn cqsp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cqsp"))
}

fn run_ok(args: &[&str]) -> String {
    let out = cqsp().args(args).output().expect("spawn");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn sha(path: &Path) -> Vec<u8> {
    Sha256::digest(fs::read(path).unwrap()).to_vec()
}

#[test]
fn capacity_row_for_bsc() {
    let out = run_ok(&["capacity", "--preset", "bsc", "--param", "p=0.1"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "channel,capacity,r_inf,mutual_information_uniform,sampled_max");
    let cap: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(format!("{cap:.6}"), "0.368064");
}

#[test]
fn exponent_grid_row_count() {
    let out = run_ok(&["exponent", "--preset", "bsc", "--param", "p=0.1", "--rates", "0.02:0.34:10", "--jobs", "3"]);
    assert_eq!(out.lines().count(), 11);
    assert!(out.ends_with('\n'));
    let rates: Vec<f64> = out.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(rates.windows(2).all(|w| w[0] < w[1]), "rows must stay in grid order");
}

#[test]
fn byte_identical_reruns_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"preset":"mixed-hadamard","params":{"eps":0.1},"rate_grid":"0.05:0.25:6"}"#).unwrap();
    let mut hashes = Vec::new();
    for (i, jobs) in ["1", "4", "1"].iter().enumerate() {
        let out = dir.path().join(format!("saddle{i}.csv"));
        run_ok(&["saddle", "--config", cfg.to_str().unwrap(), "--jobs", jobs, "--out", out.to_str().unwrap()]);
        hashes.push(sha(&out));
    }
    assert!(hashes.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn bound_rows_over_n_grid() {
    let out = run_ok(&["bound", "--preset", "bsc", "--param", "p=0.1", "--rate", "0.2", "--n-range", "100:1000:4"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 5);
    let header: Vec<&str> = lines[0].split(',').collect();
    let valid = header.iter().position(|h| *h == "valid").unwrap();
    for l in &lines[1..] {
        assert_eq!(l.split(',').nth(valid).unwrap(), "false");
    }
}

#[test]
fn explicit_channel_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let spec = dir.path().join("hadamard.json");
    fs::write(
        &spec,
        format!(r#"{{"dim":2,"K":2,"W1":[[[1,0],[0,0]],[[0,0],[0,0]]],"V":[[[{s},0],[{s},0]],[[{s},0],[{m},0]]]}}"#, m = -s),
    )
    .unwrap();
    let out = run_ok(&["capacity", "--channel", spec.to_str().unwrap()]);
    let r_inf: f64 = out.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((r_inf - 0.158384).abs() < 1e-4);
}

#[test]
fn errors_carry_codes_and_leave_no_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.json");
    fs::write(&spec, r#"{"dim":2,"K":2,"W1":[[[1,0],[0,0]],[[0,0],[0,0]]],"V":[[[1,0],[1,0]],[[0,0],[1,0]]]}"#).unwrap();
    let out_path = dir.path().join("out.csv");
    let out = cqsp().args(["capacity", "--channel", spec.to_str().unwrap(), "--out", out_path.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[V_NOT_UNITARY]"));
    assert!(!out_path.exists());

    let out = cqsp()
        .args(["exponent", "--preset", "bsc", "--param", "p=0.1", "--rate", "0.5", "--out", out_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[RATE_DOMAIN]"));
    assert!(!out_path.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn verify_on_presets_passes() {
    let out = cqsp().arg("verify").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["failed"], 0);
    assert!(summary["passed"].as_u64().unwrap() > 0);
    assert!(summary["details"].as_array().unwrap().iter().all(|d| d["passed"] == true));
}

#[test]
fn oracle_rows_hold() {
    let out = run_ok(&["oracle", "--preset", "bsc", "--param", "p=0.1", "--rate", "0.3", "--gamma", "0.05", "--n-range", "2:4:3"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
}
