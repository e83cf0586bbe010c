use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn scatter(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scatter"))
        .args(args)
        .arg("--out")
        .arg(dir.join("out"))
        .arg("--cache")
        .arg(dir.join("cache"))
        .output()
        .expect("binary runs")
}

#[test]
fn minus_identity_has_no_new_eigenvalues_and_no_deficit() {
    let dir = tempfile::tempdir().unwrap();
    let out = scatter(dir.path(), &["spectrum", "--preset", "minus-identity", "--lambda-max", "100"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let listing = fs::read_to_string(dir.path().join("out/spectrum.jsonl")).unwrap();
    assert!(!listing.contains("\"new\""));
    assert!(listing.lines().count() > 10, "old eigenvalues are listed");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/spectrum-summary.json")).unwrap()).unwrap();
    assert_eq!(summary["new_eigenvalues"], 0);
    assert_eq!(summary["max_abs_deficit"], 0);
}

#[test]
fn invalid_config_exits_with_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = scatter(dir.path(), &["sieve", "--sieve.epsilon", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sieve"));
    let out = scatter(dir.path(), &["sieve", "--no.such_key", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = scatter(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn equidist_truncated_deviation_vanishes_on_linf_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = scatter(dir.path(), &["equidist", "--lambda-max", "10000", "--range.samples_per_decade", "20"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/decay.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[1] == "1" {
            rows += 1;
            assert_eq!(f[3].parse::<f64>().unwrap(), 0.0, "{line}");
        }
    }
    assert_eq!(rows, 20);
    assert!(dir.path().join("out/decay-plot.dat").exists());
}

#[test]
fn verify_lists_every_check_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = scatter(dir.path(), &["verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/verify.json")).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 8);
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sieve", "--lambda-max", "20000", "--sieve.type_search", "5000"];
    assert!(scatter(dir.path(), &args).status.success());
    let first = fs::read(dir.path().join("out/density.csv")).unwrap();
    let dio = fs::read(dir.path().join("out/diophantine.json")).unwrap();
    // the second run reads the cached norm table
    assert!(scatter(dir.path(), &args).status.success());
    assert_eq!(fs::read(dir.path().join("out/density.csv")).unwrap(), first);
    assert_eq!(fs::read(dir.path().join("out/diophantine.json")).unwrap(), dio);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "[range]\nlambda_max = 5000\n").unwrap();
    let out = scatter(dir.path(), &["norms", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/norms.csv")).unwrap();
    let last: f64 = csv.lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(last <= 5000.0 && last > 4990.0);
}
