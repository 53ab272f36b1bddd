//! Benchmark functions, SNR scaling, error metrics and the Monte Carlo study
//! runner.

pub mod functions;
pub mod study;

pub use functions::{grid_point, make_sine, make_test_function, TestFunctionName};
pub use study::*;

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Rescales `f` so that `sd(f) / sigma_p` equals `target_snr`.
pub fn scale_to_snr(f: &Signal, sigma_p: f64, target_snr: f64) -> Result<Signal> {
    if !(sigma_p > 0.0) {
        return Err(Error::InvalidConfig(format!("sigma_p = {sigma_p} must be positive")));
    }
    let sd = f.sd();
    if !(sd > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let factor = target_snr * sigma_p / sd;
    Ok(f.with_samples(f.samples().iter().map(|v| v * factor).collect()))
}

/// Mean squared difference over the sampling grid.
pub fn imse(f_hat: &[f64], f: &[f64]) -> Result<f64> {
    if f_hat.len() != f.len() {
        return Err(Error::LengthMismatch(f_hat.len(), f.len()));
    }
    if f.is_empty() {
        return Ok(0.0);
    }
    let ss: f64 = f_hat.iter().zip(f).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(ss / f.len() as f64)
}
