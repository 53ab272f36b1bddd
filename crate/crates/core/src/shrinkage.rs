//! Noise-level estimation and the three wavelet estimators of a function
//! observed in (approximately) white noise: projection onto a coarse
//! approximation space, universal hard thresholding, and James-Stein block
//! thresholding.
//!
//! All three act only on the detail levels they are configured for; the
//! scaling block and every other detail level pass through unchanged.

use std::fmt;
use std::str::FromStr;

use crate::dwt::{forward_dwt_slice, inverse_dwt_vec, BasisName, WaveletCoefficients};
use crate::error::{Error, Result};
use crate::signal::{dyadic_level, Signal};

/// Normal-consistency constant for the median absolute value.
pub const MAD_CONSTANT: f64 = 0.6745;

/// Block James-Stein shrink constant.
pub const BLOCK_LAMBDA: f64 = 4.50524;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SigmaEstimator {
    Mad,
    Std,
}

impl FromStr for SigmaEstimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mad" => Ok(SigmaEstimator::Mad),
            "std" => Ok(SigmaEstimator::Std),
            other => Err(Error::UnknownName(format!("sigma estimator '{other}'"))),
        }
    }
}

/// Inclusive range of detail levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LevelRange {
    pub lo: usize,
    pub hi: usize,
}

impl LevelRange {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidConfig(format!("empty level range {lo}..={hi}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, j: usize) -> bool {
        (self.lo..=self.hi).contains(&j)
    }

    pub fn check(&self, max_level: usize) -> Result<()> {
        if self.hi >= max_level {
            return Err(Error::InvalidConfig(format!(
                "levels {}..={} exceed the finest detail level {}",
                self.lo,
                self.hi,
                max_level.saturating_sub(1)
            )));
        }
        Ok(())
    }
}

impl fmt::Display for LevelRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockParams {
    /// Block length; `None` means `ceil(ln n)`.
    pub length: Option<usize>,
    pub lambda: f64,
}

impl Default for BlockParams {
    fn default() -> Self {
        Self {
            length: None,
            lambda: BLOCK_LAMBDA,
        }
    }
}

impl BlockParams {
    pub fn block_len(&self, n: usize) -> usize {
        self.length
            .unwrap_or_else(|| (n as f64).ln().ceil() as usize)
            .max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// Keep only the approximation space `V_level`.
    LinearProjection { level: usize },
    /// Universal hard threshold on the given levels.
    TermByTerm { levels: LevelRange },
    /// Block James-Stein shrinkage on the given levels.
    Block { levels: LevelRange, params: BlockParams },
}

impl Regime {
    pub fn is_nonlinear(&self) -> bool {
        !matches!(self, Regime::LinearProjection { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::LinearProjection { .. } => "linear",
            Regime::TermByTerm { .. } => "term",
            Regime::Block { .. } => "block",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkageSpec {
    pub regime: Regime,
    pub sigma_estimator: SigmaEstimator,
}

impl ShrinkageSpec {
    pub fn linear(level: usize) -> Self {
        Self {
            regime: Regime::LinearProjection { level },
            sigma_estimator: SigmaEstimator::Mad,
        }
    }

    pub fn term_by_term(levels: LevelRange) -> Self {
        Self {
            regime: Regime::TermByTerm { levels },
            sigma_estimator: SigmaEstimator::Mad,
        }
    }

    pub fn block(levels: LevelRange) -> Self {
        Self {
            regime: Regime::Block {
                levels,
                params: BlockParams::default(),
            },
            sigma_estimator: SigmaEstimator::Mad,
        }
    }

    /// Schedule used for samples of length `n`: `V_{projection_level(n)}` for
    /// the linear regime, `threshold_levels(n)` for the others.
    pub fn for_length(kind: RegimeKind, n: usize) -> Result<Self> {
        Ok(match kind {
            RegimeKind::Linear => Self::linear(default_projection_level(n)?),
            RegimeKind::Term => Self::term_by_term(default_threshold_levels(n)?),
            RegimeKind::Block => Self::block(default_threshold_levels(n)?),
        })
    }

    /// Noise level needed by [`ShrinkageSpec::apply`], if any.
    pub fn needs_sigma(&self) -> bool {
        self.regime.is_nonlinear()
    }

    /// Estimates the function underlying `y`. `sigma` is required for the
    /// nonlinear regimes; when `None` it is estimated from `y` itself.
    pub fn apply(&self, y: &[f64], basis: BasisName, sigma: Option<f64>) -> Result<Vec<f64>> {
        match self.regime {
            Regime::LinearProjection { level } => project(y, basis, level),
            Regime::TermByTerm { levels } => {
                let sigma = match sigma {
                    Some(s) => s,
                    None => estimate_sigma_of(y, basis, self.sigma_estimator)?,
                };
                hard_threshold(y, basis, levels, sigma)
            }
            Regime::Block { levels, params } => {
                let sigma = match sigma {
                    Some(s) => s,
                    None => estimate_sigma_of(y, basis, self.sigma_estimator)?,
                };
                block_threshold(y, basis, levels, sigma, params)
            }
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let max_level = dyadic_level(n)?;
        match self.regime {
            Regime::LinearProjection { level } => {
                if level >= max_level {
                    return Err(Error::InvalidConfig(format!(
                        "projection level {level} must be below J = {max_level}"
                    )));
                }
                Ok(())
            }
            Regime::TermByTerm { levels } | Regime::Block { levels, .. } => levels.check(max_level),
        }
    }
}

/// The three estimator families, without level details.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegimeKind {
    Linear,
    Term,
    Block,
}

impl RegimeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeKind::Linear => "linear",
            RegimeKind::Term => "term",
            RegimeKind::Block => "block",
        }
    }
}

impl fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegimeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "l" => Ok(RegimeKind::Linear),
            "term" | "nt" | "term_by_term" => Ok(RegimeKind::Term),
            "block" | "nb" => Ok(RegimeKind::Block),
            other => Err(Error::UnknownName(format!("shrinkage regime '{other}'"))),
        }
    }
}

/// Projection level: `V_5` for n = 512, `V_6` for 1024 and 2048, `V_7` for
/// 4096 and 8192; in general `floor(J/2) + 1`, which reproduces those.
pub fn default_projection_level(n: usize) -> Result<usize> {
    let j = dyadic_level(n)?;
    if j < 2 {
        return Err(Error::InsufficientData(format!("n = {n} too short to project")));
    }
    Ok((j / 2 + 1).min(j - 1))
}

/// Thresholded levels: 4-7 for n in {512, 1024, 2048}, 5-8 for n in
/// {4096, 8192, 32768}. Other lengths use `(floor(J/2) + 1)..=(J - 2)`.
pub fn default_threshold_levels(n: usize) -> Result<LevelRange> {
    let j = dyadic_level(n)?;
    match n {
        512 | 1024 | 2048 => LevelRange::new(4, 7),
        4096 | 8192 | 32768 => LevelRange::new(5, 8),
        _ => {
            if j < 3 {
                return Err(Error::InsufficientData(format!("n = {n} too short to threshold")));
            }
            let hi = j - 2;
            LevelRange::new((j / 2 + 1).min(hi), hi)
        }
    }
}

pub fn estimate_sigma(c: &WaveletCoefficients, method: SigmaEstimator) -> f64 {
    sigma_from_details(c.finest(), method)
}

fn sigma_from_details(d: &[f64], method: SigmaEstimator) -> f64 {
    if d.is_empty() {
        return 0.0;
    }
    match method {
        SigmaEstimator::Mad => {
            let mut abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
            median_in_place(&mut abs) / MAD_CONSTANT
        }
        SigmaEstimator::Std => crate::signal::sample_sd(d),
    }
}

/// Noise level from the finest detail level of `y`.
pub fn estimate_sigma_of(y: &[f64], basis: BasisName, method: SigmaEstimator) -> Result<f64> {
    let j = dyadic_level(y.len())?;
    if j == 0 {
        return Err(Error::InsufficientData("need at least 2 samples".into()));
    }
    let c = forward_dwt_slice(y, basis, j - 1)?;
    Ok(estimate_sigma(&c, method))
}

pub(crate) fn median_in_place(v: &mut [f64]) -> f64 {
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    let mid = n / 2;
    let (_, upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

pub fn universal_threshold(sigma: f64, n: usize) -> f64 {
    sigma * (2.0 * (n as f64).ln()).sqrt()
}

/// Zeroes every coefficient with `|d| <= lambda` on the given levels.
pub fn hard_threshold_levels(c: &mut WaveletCoefficients, levels: LevelRange, lambda: f64) {
    for j in levels.lo.max(c.coarse_level())..=levels.hi.min(c.max_level() - 1) {
        for d in c.detail_mut(j) {
            if d.abs() <= lambda {
                *d = 0.0;
            }
        }
    }
}

/// Shrinks contiguous blocks by `max(0, 1 - lambda L sigma^2 / S^2)`.
///
/// A level is cut into blocks of length `L` starting at index 0. The last
/// block, when short, takes its energy over `L` entries by wrapping around
/// periodically, but its factor is applied only to its own entries. A level
/// with no more than `L` entries is a single block of its own length.
pub fn block_shrink_levels(
    c: &mut WaveletCoefficients,
    levels: LevelRange,
    sigma: f64,
    params: BlockParams,
) {
    let n = c.len();
    let len = params.block_len(n);
    let s2 = sigma * sigma;
    for j in levels.lo.max(c.coarse_level())..=levels.hi.min(c.max_level() - 1) {
        let d = c.detail_mut(j);
        let m = d.len();
        if m <= len {
            let energy: f64 = d.iter().map(|v| v * v).sum();
            let factor = block_factor(energy, params.lambda * m as f64 * s2);
            d.iter_mut().for_each(|v| *v *= factor);
            continue;
        }
        let factors: Vec<f64> = (0..m.div_ceil(len))
            .map(|b| {
                let energy: f64 = (b * len..(b + 1) * len).map(|i| d[i % m].powi(2)).sum();
                block_factor(energy, params.lambda * len as f64 * s2)
            })
            .collect();
        for (i, v) in d.iter_mut().enumerate() {
            *v *= factors[i / len];
        }
    }
}

fn block_factor(energy: f64, penalty: f64) -> f64 {
    if energy <= 0.0 {
        return 0.0;
    }
    (1.0 - penalty / energy).max(0.0)
}

fn project(y: &[f64], basis: BasisName, level: usize) -> Result<Vec<f64>> {
    let c = forward_dwt_slice(y, basis, level)?;
    let mut kept = WaveletCoefficients::zeros(level, c.max_level())?;
    kept.scaling_mut().copy_from_slice(c.scaling());
    Ok(inverse_dwt_vec(&kept, basis))
}

fn hard_threshold(y: &[f64], basis: BasisName, levels: LevelRange, sigma: f64) -> Result<Vec<f64>> {
    levels.check(dyadic_level(y.len())?)?;
    let mut c = forward_dwt_slice(y, basis, levels.lo)?;
    hard_threshold_levels(&mut c, levels, universal_threshold(sigma, y.len()));
    Ok(inverse_dwt_vec(&c, basis))
}

fn block_threshold(
    y: &[f64],
    basis: BasisName,
    levels: LevelRange,
    sigma: f64,
    params: BlockParams,
) -> Result<Vec<f64>> {
    levels.check(dyadic_level(y.len())?)?;
    let mut c = forward_dwt_slice(y, basis, levels.lo)?;
    block_shrink_levels(&mut c, levels, sigma, params);
    Ok(inverse_dwt_vec(&c, basis))
}

/// Projection onto `V_proj_level`.
pub fn denoise_linear(y: &Signal, basis: BasisName, proj_level: usize) -> Result<Signal> {
    Ok(y.with_samples(project(y.samples(), basis, proj_level)?))
}

pub fn denoise_term_by_term(y: &Signal, basis: BasisName, levels: LevelRange, sigma: f64) -> Result<Signal> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidConfig(format!("sigma = {sigma} must be non-negative")));
    }
    Ok(y.with_samples(hard_threshold(y.samples(), basis, levels, sigma)?))
}

pub fn denoise_block(y: &Signal, basis: BasisName, levels: LevelRange, sigma: f64) -> Result<Signal> {
    denoise_block_with(y, basis, levels, sigma, BlockParams::default())
}

pub fn denoise_block_with(
    y: &Signal,
    basis: BasisName,
    levels: LevelRange,
    sigma: f64,
    params: BlockParams,
) -> Result<Signal> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidConfig(format!("sigma = {sigma} must be non-negative")));
    }
    Ok(y.with_samples(block_threshold(y.samples(), basis, levels, sigma, params)?))
}
