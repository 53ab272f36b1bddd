//! Iterative Cochrane-Orcutt estimation of a function observed under AR(1)
//! errors.
//!
//! Each iteration prewhitens the data with the current `rho`, estimates the
//! transformed function `g` by wavelet shrinkage, recolors it into an
//! estimate of `f`, and re-estimates `rho` from the residuals. Several
//! initial values are run to convergence; the one with the smallest residual
//! sum of squares wins (ties go to the smallest `|rho|`). A final pass then
//! re-estimates `f` at the selected `rho` with the final shrinkage rule.

use rand::Rng;

use crate::car1::estimate_rho_residuals;
use crate::dwt::BasisName;
use crate::error::{Error, Result};
use crate::shrinkage::{estimate_sigma_of, ShrinkageSpec};
use crate::signal::{dyadic_level, Signal};

pub const DEFAULT_TOL: f64 = 1e-15;
pub const DEFAULT_MAX_ITER: usize = 250;

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub basis: BasisName,
    pub loop_shrinkage: ShrinkageSpec,
    pub final_shrinkage: ShrinkageSpec,
    pub initial_rhos: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl FitConfig {
    pub fn new(
        basis: BasisName,
        loop_shrinkage: ShrinkageSpec,
        final_shrinkage: ShrinkageSpec,
        initial_rhos: Vec<f64>,
    ) -> Self {
        Self {
            basis,
            loop_shrinkage,
            final_shrinkage,
            initial_rhos,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol = {} must be positive", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if self.initial_rhos.is_empty() {
            return Err(Error::InvalidConfig("need at least one initial rho".into()));
        }
        if let Some(r) = self.initial_rhos.iter().find(|r| !(r.abs() < 1.0)) {
            return Err(Error::InvalidConfig(format!("initial rho {r} outside (-1, 1)")));
        }
        self.loop_shrinkage.validate(n)?;
        self.final_shrinkage.validate(n)
    }
}

/// Outcome of iterating from one initial value.
#[derive(Debug, Clone, PartialEq)]
pub struct StartResult {
    pub initial_rho: f64,
    pub rho_hat: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual sum of squares after the last iteration.
    pub rss: f64,
    /// Initial value followed by every update.
    pub rho_trace: Vec<f64>,
    /// `||y - f_hat||` after each iteration.
    pub residual_norms: Vec<f64>,
    /// Period of the cycle the estimates fell into, if the run stopped on one.
    pub cycle_length: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub rho_hat: f64,
    pub f_hat: Signal,
    pub sigma_u_hat: f64,
    pub iterations: usize,
    pub converged: bool,
    pub rho_trace: Vec<f64>,
    pub per_start_rhos: Vec<f64>,
    pub starts: Vec<StartResult>,
    /// Index into `starts` of the selected run.
    pub selected: usize,
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::NonStationaryRho(rho))
    }
}

/// Same-length prewhitening: `z_0 = sqrt(1 - rho^2) y_0`,
/// `z_t = y_t - rho y_{t-1}`.
pub fn prewhiten(y: &Signal, rho: f64) -> Result<Signal> {
    check_rho(rho)?;
    Ok(y.with_samples(prewhiten_slice(y.samples(), rho)))
}

pub(crate) fn prewhiten_slice(y: &[f64], rho: f64) -> Vec<f64> {
    let mut z = Vec::with_capacity(y.len());
    if let Some(&y0) = y.first() {
        z.push((1.0 - rho * rho).sqrt() * y0);
    }
    z.extend(y.windows(2).map(|w| w[1] - rho * w[0]));
    z
}

/// `f_0 = y0`, `f_t = g_t + rho f_{t-1}`. The entry `g_0` is not used.
pub fn recolor(g_hat: &Signal, rho: f64, y0: f64) -> Result<Signal> {
    check_rho(rho)?;
    if !y0.is_finite() {
        return Err(Error::NonFinite(0));
    }
    Ok(g_hat.with_samples(recolor_slice(g_hat.samples(), rho, y0)))
}

pub(crate) fn recolor_slice(g: &[f64], rho: f64, y0: f64) -> Vec<f64> {
    let mut f = Vec::with_capacity(g.len());
    if g.is_empty() {
        return f;
    }
    let mut prev = y0;
    f.push(prev);
    for gt in &g[1..] {
        prev = gt + rho * prev;
        f.push(prev);
    }
    f
}

/// Function estimate at a known `rho`: prewhiten, shrink, recolor.
///
/// Returns the estimate and the noise level used by the shrinkage step
/// (estimated from the prewhitened series with `estimator`).
pub fn estimate_at_rho(
    y: &[f64],
    rho: f64,
    basis: BasisName,
    spec: &ShrinkageSpec,
) -> Result<(Vec<f64>, f64)> {
    check_rho(rho)?;
    let z = prewhiten_slice(y, rho);
    let sigma = estimate_sigma_of(&z, basis, spec.sigma_estimator)?;
    let g = spec.apply(&z, basis, Some(sigma))?;
    Ok((recolor_slice(&g, rho, y[0]), sigma))
}

fn loop_step(y: &[f64], rho: f64, cfg: &FitConfig) -> Result<Vec<f64>> {
    let z = prewhiten_slice(y, rho);
    // Under a linear loop the noise level is only needed at the end.
    let sigma = if cfg.loop_shrinkage.needs_sigma() {
        Some(estimate_sigma_of(&z, cfg.basis, cfg.loop_shrinkage.sigma_estimator)?)
    } else {
        None
    };
    let g = cfg.loop_shrinkage.apply(&z, cfg.basis, sigma)?;
    let f = recolor_slice(&g, rho, y[0]);
    Ok(y.iter().zip(&f).map(|(a, b)| a - b).collect())
}

/// Iterates from one initial value until successive estimates differ by
/// less than `cfg.tol` or `cfg.max_iter` is reached.
///
/// The update is a deterministic map, so when an estimate repeats one seen
/// before the iteration is periodic and can never meet the tolerance. That
/// happens with tolerances near the rounding floor; the run then stops early,
/// unconverged, with `cycle_length` set.
pub fn run_start(y: &[f64], initial_rho: f64, cfg: &FitConfig) -> Result<StartResult> {
    check_rho(initial_rho)?;
    let mut rho = initial_rho;
    let mut trace = vec![rho];
    let mut norms = Vec::new();
    let mut converged = false;
    let mut rss = f64::NAN;
    let mut iterations = 0;
    let mut cycle_length = None;
    while iterations < cfg.max_iter {
        iterations += 1;
        let e = loop_step(y, rho, cfg)?;
        rss = e.iter().map(|v| v * v).sum();
        norms.push(rss.sqrt());
        let next = estimate_rho_residuals(&e);
        trace.push(next);
        let delta = (next - rho).abs();
        rho = next;
        if delta < cfg.tol {
            converged = true;
            break;
        }
        let earlier = &trace[..trace.len() - 1];
        if let Some(pos) = earlier.iter().rposition(|r| *r == next) {
            cycle_length = Some(earlier.len() - pos);
            break;
        }
    }
    Ok(StartResult {
        initial_rho,
        rho_hat: rho,
        iterations,
        converged,
        rss,
        rho_trace: trace,
        residual_norms: norms,
        cycle_length,
    })
}

/// Index of the run with the smallest residual sum of squares; near-equal
/// sums (relative 1e-12) go to the smallest `|rho_hat|`, then the earliest.
pub fn select_start(starts: &[StartResult]) -> usize {
    let mut best = 0;
    for (i, s) in starts.iter().enumerate().skip(1) {
        let b = &starts[best];
        let scale = s.rss.abs().max(b.rss.abs()).max(f64::MIN_POSITIVE);
        if (s.rss - b.rss).abs() <= 1e-12 * scale {
            if s.rho_hat.abs() < b.rho_hat.abs() {
                best = i;
            }
        } else if s.rss < b.rss {
            best = i;
        }
    }
    best
}

/// Runs every start, selects one, and re-estimates `f` with the final rule.
pub fn fit(y: &Signal, cfg: &FitConfig) -> Result<FitResult> {
    dyadic_level(y.len())?;
    if y.len() < 4 {
        return Err(Error::InsufficientData(format!("need at least 4 samples, got {}", y.len())));
    }
    cfg.validate(y.len())?;
    let samples = y.samples();
    let starts = cfg
        .initial_rhos
        .iter()
        .map(|&r| run_start(samples, r, cfg))
        .collect::<Result<Vec<_>>>()?;
    let selected = select_start(&starts);
    let chosen = &starts[selected];
    let (f_hat, sigma_u_hat) = estimate_at_rho(samples, chosen.rho_hat, cfg.basis, &cfg.final_shrinkage)?;
    Ok(FitResult {
        rho_hat: chosen.rho_hat,
        f_hat: y.with_samples(f_hat),
        sigma_u_hat,
        iterations: chosen.iterations,
        converged: chosen.converged,
        rho_trace: chosen.rho_trace.clone(),
        per_start_rhos: starts.iter().map(|s| s.rho_hat).collect(),
        selected,
        starts,
    })
}

/// Uniform draws on the open interval (-1, 1).
pub fn draw_initial_rhos<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let r: f64 = rng.random_range(-1.0..1.0);
        if r > -1.0 {
            out.push(r);
        }
    }
    out
}
