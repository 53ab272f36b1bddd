//! CAR(1) / Ornstein-Uhlenbeck error model sampled on the grid `h = 1/n`.
//!
//! The sampled process is an exact AR(1): `e_t = rho e_{t-1} + u_t` with
//! `rho = exp(-alpha h)`, stationary variance `sigma_p2 = sigma2 / (2 alpha)`
//! and innovation variance `sigma_u2 = sigma_p2 (1 - rho^2)`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{stream, NOISE_LANE};
use crate::signal::Signal;

/// Error-model parameters with their algebraic interlocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Car1Params {
    rho: f64,
    alpha: f64,
    sigma2: f64,
    n: usize,
    sigma_p2: f64,
    sigma_u2: f64,
}

impl Car1Params {
    pub fn rho(&self) -> f64 {
        self.rho
    }
    /// Continuous mean-reversion rate; the OU drift coefficient is `-alpha`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn step(&self) -> f64 {
        1.0 / self.n as f64
    }
    pub fn sigma_p2(&self) -> f64 {
        self.sigma_p2
    }
    pub fn sigma_p(&self) -> f64 {
        self.sigma_p2.sqrt()
    }
    pub fn sigma_u2(&self) -> f64 {
        self.sigma_u2
    }

    /// Parameters from the continuous rate instead of the lag-1 coefficient.
    pub fn from_alpha(alpha: f64, sigma2: f64, n: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::OutOfModelRange(format!("alpha = {alpha} must be positive")));
        }
        derive_params(rho_from_alpha(alpha, n), sigma2, n)
    }
}

pub fn alpha_from_rho(rho: f64, n: usize) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::OutOfModelRange(format!("rho = {rho} must lie in (0, 1)")));
    }
    if n == 0 {
        return Err(Error::OutOfModelRange("n must be positive".into()));
    }
    Ok(-(n as f64) * rho.ln())
}

pub fn rho_from_alpha(alpha: f64, n: usize) -> f64 {
    (-alpha / n as f64).exp()
}

pub fn derive_params(rho: f64, sigma2: f64, n: usize) -> Result<Car1Params> {
    let alpha = alpha_from_rho(rho, n)?;
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::OutOfModelRange(format!("sigma2 = {sigma2} must be positive")));
    }
    let sigma_p2 = sigma2 / (2.0 * alpha);
    Ok(Car1Params {
        rho,
        alpha,
        sigma2,
        n,
        sigma_p2,
        sigma_u2: sigma_p2 * (1.0 - rho * rho),
    })
}

/// Stationary AR(1) path drawn from an explicit generator.
pub fn simulate_car1_with<R: Rng + ?Sized>(params: &Car1Params, length: usize, rng: &mut R) -> Vec<f64> {
    let sd_p = params.sigma_p2.sqrt();
    let sd_u = params.sigma_u2.sqrt();
    let mut out = Vec::with_capacity(length);
    if length == 0 {
        return out;
    }
    let z0: f64 = rng.sample(StandardNormal);
    let mut prev = sd_p * z0;
    out.push(prev);
    for _ in 1..length {
        let z: f64 = rng.sample(StandardNormal);
        prev = params.rho * prev + sd_u * z;
        out.push(prev);
    }
    out
}

/// Stationary AR(1) path on the unit-interval grid, deterministic in `seed`.
pub fn simulate_car1(params: &Car1Params, length: usize, seed: u64) -> Result<Signal> {
    if length == 0 {
        return Err(Error::InsufficientData("path length must be at least 1".into()));
    }
    let mut rng = stream(seed, 0, NOISE_LANE);
    Signal::new(simulate_car1_with(params, length, &mut rng))
}

/// `y = f + e` with `e` from [`simulate_car1_with`].
pub fn simulate_model_with<R: Rng + ?Sized>(f: &Signal, params: &Car1Params, rng: &mut R) -> Result<Signal> {
    f.dyadic_level()?;
    let noise = simulate_car1_with(params, f.len(), rng);
    let y = f.samples().iter().zip(&noise).map(|(a, b)| a + b).collect();
    Ok(f.with_samples(y))
}

pub fn simulate_model(f: &Signal, params: &Car1Params, seed: u64) -> Result<Signal> {
    let mut rng = stream(seed, 0, NOISE_LANE);
    simulate_model_with(f, params, &mut rng)
}

/// Conditional least-squares lag-1 estimate `sum y_t y_{t-1} / sum y_{t-1}^2`.
pub fn estimate_rho_lag1(y: &[f64]) -> Result<f64> {
    if y.len() < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 samples, got {}", y.len())));
    }
    let num: f64 = y.windows(2).map(|w| w[1] * w[0]).sum();
    let den: f64 = y[..y.len() - 1].iter().map(|v| v * v).sum();
    if den == 0.0 {
        return Err(Error::DegenerateSeries);
    }
    Ok(num / den)
}

const RHO_CLAMP: f64 = 1.0 - 1e-9;

/// Residual-based update of the iterative fit:
/// `sum_{t>=1} e_t e_{t-1} / sum_{t>=1} e_t^2`, clamped into the open unit
/// interval. Near-zero residual energy yields 0.
pub fn estimate_rho_residuals(e: &[f64]) -> f64 {
    if e.len() < 2 {
        return 0.0;
    }
    let num: f64 = e.windows(2).map(|w| w[1] * w[0]).sum();
    let den: f64 = e[1..].iter().map(|v| v * v).sum();
    if den < 1e-300 {
        return 0.0;
    }
    (num / den).clamp(-RHO_CLAMP, RHO_CLAMP)
}

/// Fisher information for `(f_t, rho, sigma_u2)` in the AR(1)-error model.
pub fn fisher_information(rho: f64, sigma_u2: f64, n: usize) -> Result<[[f64; 3]; 3]> {
    if !(rho.abs() < 1.0) {
        return Err(Error::OutOfModelRange(format!("|rho| = {} must be < 1", rho.abs())));
    }
    if !(sigma_u2 > 0.0 && sigma_u2.is_finite()) {
        return Err(Error::OutOfModelRange(format!("sigma_u2 = {sigma_u2} must be positive")));
    }
    if n < 2 {
        return Err(Error::OutOfModelRange(format!("n = {n} must be at least 2")));
    }
    let nf = n as f64;
    let one_m_r2 = 1.0 - rho * rho;
    let i11 = (one_m_r2 + (nf - 1.0) * (1.0 - rho).powi(2)) / sigma_u2;
    let i22 = (nf - 1.0 + (3.0 - nf) * rho * rho) / (one_m_r2 * one_m_r2);
    let i23 = 1.0 / (sigma_u2 * one_m_r2);
    let i33 = nf / (2.0 * sigma_u2 * sigma_u2);
    Ok([[i11, 0.0, 0.0], [0.0, i22, i23], [0.0, i23, i33]])
}
