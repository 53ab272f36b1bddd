//! End-to-end command-line pipeline on synthetic station data: writes two
//! minute-resolution CSV series, fits rho on one, and tests whether the two
//! differ by more than a constant.

use std::fmt::Write as _;

use wfanova::car1::{derive_params, simulate_car1};
use wfanova::cli;
use wfanova::simlab::grid_point;

fn write_series(path: &std::path::Path, values: &[f64]) -> std::io::Result<()> {
    let start = chrono::NaiveDate::from_ymd_opt(2010, 9, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    let mut body = String::from("timestamp,temperature\n");
    for (k, v) in values.iter().enumerate() {
        let t = start + chrono::Duration::minutes(k as i64);
        let _ = writeln!(body, "{},{v:.6}", t.format("%Y-%m-%d %H:%M:%S"));
    }
    std::fs::write(path, body)
}

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 4096;
    let dir = std::env::temp_dir().join("wfanova-station");
    std::fs::create_dir_all(&dir)?;
    let params = derive_params(0.99, 1.0, n)?;
    let daily = |k: usize| 20.0 + 4.0 * (2.0 * std::f64::consts::PI * 3.0 * grid_point(k, n)).sin();
    let noise_a = simulate_car1(&params, n, 1)?;
    let noise_b = simulate_car1(&params, n, 2)?;
    let reference: Vec<f64> = (0..n).map(|k| daily(k) + noise_a.samples()[k]).collect();
    let shifted: Vec<f64> = (0..n).map(|k| daily(k) + 1.5 + noise_b.samples()[k]).collect();
    let bumped: Vec<f64> = (0..n)
        .map(|k| {
            let t = grid_point(k, n);
            shifted[k] + 3.0 * (-((t - 0.4) / 0.02).powi(2)).exp()
        })
        .collect();
    let (r, s, b) = (dir.join("reference.csv"), dir.join("shifted.csv"), dir.join("bumped.csv"));
    write_series(&r, &reference)?;
    write_series(&s, &shifted)?;
    write_series(&b, &bumped)?;

    let p = |x: &std::path::Path| x.to_string_lossy().into_owned();
    println!("== fit {}", p(&s));
    cli::run(["wfanova", "fit", "--input", &p(&s), "--starts", "5"]);
    println!("== constant shift only");
    cli::run(["wfanova", "test", "--input", &p(&s), "--reference", &p(&r), "--branch", "p12"]);
    println!("== shift plus a bump");
    cli::run(["wfanova", "test", "--input", &p(&b), "--reference", &p(&r), "--branch", "p12"]);
    Ok(())
}
