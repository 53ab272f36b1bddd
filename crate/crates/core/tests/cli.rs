use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wfanova::car1::{derive_params, simulate_model};
use wfanova::simlab::{make_test_function, scale_to_snr, TestFunctionName};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wfanova"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_csv(dir: &Path, name: &str, values: &[f64]) -> PathBuf {
    let mut body = String::from("t,value\n");
    for (k, v) in values.iter().enumerate() {
        let _ = writeln!(body, "{k},{v}");
    }
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn doppler_series(n: usize, seed: u64) -> Vec<f64> {
    let p = derive_params(0.99, 1.0, n).unwrap();
    let f = scale_to_snr(&make_test_function(TestFunctionName::Doppler, n).unwrap(), p.sigma_p(), 7.0).unwrap();
    simulate_model(&f, &p, seed).unwrap().into_samples()
}

fn field(stdout: &[u8], key: &str) -> String {
    String::from_utf8_lossy(stdout)
        .lines()
        .find(|l| l.starts_with(key))
        .and_then(|l| l.split_whitespace().last().map(str::to_string))
        .unwrap_or_else(|| panic!("no `{key}` line"))
}

#[test]
fn fit_recovers_rho_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(dir.path(), "y.csv", &doppler_series(2048, 5));
    let out_csv = dir.path().join("f_hat.csv");
    let out = run(&["fit", "--input", input.to_str().unwrap(), "--starts", "5", "--output", out_csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rho: f64 = field(&out.stdout, "rho_hat").parse().unwrap();
    assert!((rho - 0.99).abs() < 0.01, "rho_hat {rho}");
    let text = String::from_utf8_lossy(&out.stdout);
    let per_start: Vec<f64> = text
        .lines()
        .skip_while(|l| !l.starts_with("start,"))
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(per_start.len(), 5);
    assert!(per_start.iter().all(|r| (r - per_start[0]).abs() < 1e-6));
    let fitted = std::fs::read_to_string(out_csv).unwrap();
    assert_eq!(fitted.lines().count(), 2049);
}

#[test]
fn rejects_nan_rows_and_short_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut values = doppler_series(64, 1);
    values[10] = f64::NAN;
    let bad = write_csv(dir.path(), "nan.csv", &values);
    let out = run(&["fit", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let short = write_csv(dir.path(), "short.csv", &doppler_series(64, 1));
    let out = run(&["fit", "--input", short.to_str().unwrap(), "--n", "128"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("insufficient data"));
}

#[test]
fn test_command_decisions() {
    let dir = tempfile::tempdir().unwrap();
    let y = doppler_series(2048, 9);
    let input = write_csv(dir.path(), "y.csv", &y);
    let p = input.to_str().unwrap();

    let same = run(&["test", "--input", p, "--reference", p]);
    assert!(same.status.success(), "{}", String::from_utf8_lossy(&same.stderr));
    assert_eq!(field(&same.stdout, "decision"), "H0");
    assert!(String::from_utf8_lossy(&same.stdout).contains("do not reject H0"));

    let bumped: Vec<f64> = y
        .iter()
        .enumerate()
        .map(|(k, v)| v + 2.0 + if (900..964).contains(&k) { 1.0 } else { 0.0 })
        .collect();
    let b = write_csv(dir.path(), "b.csv", &bumped);
    let out = run(&["test", "--input", b.to_str().unwrap(), "--reference", p, "--branch", "p12"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("T(j(") && text.contains("+Q(j("), "{text}");
    assert!(text.contains("critical value"));
    assert!(text.contains("reject H0") && !text.contains("do not reject"), "{text}");

    let half = write_csv(dir.path(), "half.csv", &y[..1024]);
    let out = run(&["test", "--input", p, "--reference", half.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "functions = [\"dopler\"]\nn = 512\nsnr = 3\nrho = 0.99\n").unwrap();
    let out = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dopler"));
    let out = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
