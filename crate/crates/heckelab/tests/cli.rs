//! CLI behavior: subcommands, exit codes, output formats, cache and
//! determinism across thread counts, all through the real binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heckelab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn kappa_prints_value_and_residual() {
    let out = run(&["kappa", "--tol", "1e-10"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["kappa"].as_f64().unwrap() > 10.0 / 9.0);
    assert!(v["residual"].as_f64().unwrap() <= 1e-10);
    assert!(v["exceeds_10_9"].as_bool().unwrap());
}

#[test]
fn unknown_flag_exits_2_with_usage() {
    let out = run(&["kappa", "--definitely-not-a-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.to_lowercase().contains("usage") || err.contains("--help"), "{err}");
}

#[test]
fn unknown_experiment_exits_2() {
    let out = run(&["exp", "not-an-experiment"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_green() {
    let out = run(&["selftest"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = stdout_of(&out);
    assert!(text.lines().all(|l| l.is_empty() || l.starts_with("PASS")));
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 10);
}

#[test]
fn coeffs_cache_format_and_stability() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    let base = [
        "coeffs",
        "--form",
        "ec_1_0",
        "--p-max",
        "200",
        "--cache-dir",
    ];
    let mut args1: Vec<&str> = base.to_vec();
    let cache_s = cache.to_str().unwrap();
    let out1_s = out1.to_str().unwrap();
    args1.extend_from_slice(&[cache_s, "--out", out1_s]);
    assert!(run(&args1).status.success());
    let mut args2: Vec<&str> = base.to_vec();
    let out2_s = out2.to_str().unwrap();
    args2.extend_from_slice(&[cache_s, "--out", out2_s]);
    assert!(run(&args2).status.success());

    let bytes1 = std::fs::read(&out1).unwrap();
    let bytes2 = std::fs::read(&out2).unwrap();
    assert_eq!(bytes1, bytes2, "cache hit must be byte-stable");
    let text = String::from_utf8(bytes1).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# schema=coeffs-v1, label=ec_1_0, k=2, N=1");
    assert_eq!(lines.next().unwrap(), "p,a_p");
    assert!(lines.next().unwrap().starts_with("3,")); // 2 is excluded
    // the cache file itself exists under the label
    assert!(cache.join("ec_1_0.csv").exists());
}

#[test]
fn signs_pair_report() {
    let out = run(&["signs", "--f1", "delta", "--f2", "e4", "--x", "2000", "--n-max", "2000"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["first_negative_f1"]["n"], 2);
    assert_eq!(v["first_negative_f2"]["n"], serde_json::Value::Null);
    assert_eq!(v["first_sign_difference"]["n"], 2);
}

#[test]
fn experiment_json_deterministic_across_threads() {
    let run_with = |threads: &str| -> String {
        let out = run(&[
            "--threads",
            threads,
            "exp",
            "first-negative",
            "--a4-bound",
            "4",
            "--a6-bound",
            "4",
            "--p-max",
            "150",
            "--n-max",
            "150",
        ]);
        assert!(out.status.success());
        stdout_of(&out)
    };
    let single = run_with("1");
    let multi = run_with("4");
    assert_eq!(single, multi, "outputs must not depend on thread count");
    let v: serde_json::Value = serde_json::from_str(&single).unwrap();
    assert_eq!(v["experiment"], "first-negative");
    assert!(v["records"].as_array().unwrap().len() > 50);
    assert!(v["aggregate"]["median_n_f"].as_u64().unwrap() >= 2);
}

#[test]
fn experiment_csv_has_header_row() {
    let out = run(&[
        "--format",
        "csv",
        "exp",
        "mod2",
        "--torsion-bound",
        "3",
        "--p-max",
        "100",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.starts_with("label,primes_checked\n"));
    assert!(text.lines().count() > 10);
}

#[test]
fn beta_csv_dump_has_full_precision() {
    let out = run(&[
        "--format",
        "csv",
        "beta",
        "--cap",
        "6",
        "--step-denom",
        "256",
        "--u-max",
        "1.0",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.starts_with("u,value\n"));
    let row = text.lines().nth(1).unwrap();
    assert!(row.split(',').all(|f| f.contains('e')), "{row}");
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lab.conf");
    std::fs::write(&cfg, "tol = 1e-9\n# comment\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "kappa"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert!(v["residual"].as_f64().unwrap() <= 1e-9);

    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "no equals sign here\n").unwrap();
    let out = run(&["--config", bad.to_str().unwrap(), "kappa"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn singular_curve_label_rejected() {
    let out = run(&["coeffs", "--form", "ec_0_0"]);
    assert_eq!(out.status.code(), Some(2));
}

fn exists_nonempty(p: &Path) -> bool {
    std::fs::metadata(p).map(|m| m.len() > 0).unwrap_or(false)
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "--out",
        path.to_str().unwrap(),
        "exp",
        "pair-signs",
        "--forms",
        "delta,e4",
        "--x",
        "500",
    ]);
    assert!(out.status.success());
    assert!(exists_nonempty(&path));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 1);
}
