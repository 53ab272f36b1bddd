use std::fmt;
use std::str::FromStr;

use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Normal};

use super::FanovaDecomposition;
use crate::dwt::{forward_dwt_slice, BasisName, WaveletCoefficients};
use crate::error::{Error, Result};
use crate::shrinkage::{median_in_place, MAD_CONSTANT};
use crate::signal::{dyadic_level, mean, Signal};

pub const DEFAULT_J_MIN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestBranch {
    /// Quadratic test on the coarse levels, for `p >= 2`.
    PGe2,
    /// Quadratic plus thresholded fine-level energy, for `1 <= p < 2`.
    PIn12,
    AdaptiveGeneral,
    AdaptivePGe2,
}

impl TestBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            TestBranch::PGe2 => "p2",
            TestBranch::PIn12 => "p12",
            TestBranch::AdaptiveGeneral => "adaptive",
            TestBranch::AdaptivePGe2 => "adaptive-p2",
        }
    }

    pub fn is_adaptive(self) -> bool {
        matches!(self, TestBranch::AdaptiveGeneral | TestBranch::AdaptivePGe2)
    }

    fn uses_q(self) -> bool {
        matches!(self, TestBranch::PIn12 | TestBranch::AdaptiveGeneral)
    }
}

impl fmt::Display for TestBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestBranch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "p2" | "p-ge-2" => Ok(TestBranch::PGe2),
            "p12" | "p-in-1-2" => Ok(TestBranch::PIn12),
            "adaptive" | "adaptive-general" => Ok(TestBranch::AdaptiveGeneral),
            "adaptive-p2" | "adaptive-p-ge-2" => Ok(TestBranch::AdaptivePGe2),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

/// Smoothness class `B^{p,q}_s(C)` the alternatives are assumed to live in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovClass {
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub radius: f64,
}

impl BesovClass {
    /// Effective smoothness used to place the coarse/fine split.
    pub fn effective_smoothness(&self) -> f64 {
        if self.p < 2.0 {
            self.s + 0.5 - 1.0 / self.p
        } else {
            self.s
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestConfig {
    pub alpha: f64,
    pub besov: BesovClass,
    pub j_min: usize,
    /// Noise level of the normalized coefficients. `None` estimates it by
    /// MAD on the finest level.
    pub eta: Option<f64>,
    pub branch: TestBranch,
    pub basis: BasisName,
}

impl TestConfig {
    /// Defaults: `alpha = 0.05`, `j_min = 3`, db6, and a Besov class that
    /// matches the branch (`p = 2, s = 1` or `p = 1, s = 1.5`).
    pub fn new(branch: TestBranch) -> Self {
        let besov = match branch {
            TestBranch::PIn12 => BesovClass { p: 1.0, q: 2.0, s: 1.5, radius: 1.0 },
            _ => BesovClass { p: 2.0, q: 2.0, s: 1.0, radius: 1.0 },
        };
        Self {
            alpha: 0.05,
            besov,
            j_min: DEFAULT_J_MIN,
            eta: None,
            branch,
            basis: BasisName::Db6,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = Some(eta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.besov;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha = {} must lie in (0, 1)", self.alpha)));
        }
        if !(b.p >= 1.0 && b.q >= 1.0) {
            return Err(Error::InvalidConfig("Besov p and q must be at least 1".into()));
        }
        if !(b.s > 1.0 / b.p) {
            return Err(Error::InvalidConfig(format!("Besov s = {} must exceed 1/p", b.s)));
        }
        if !(b.radius > 0.0) {
            return Err(Error::InvalidConfig("Besov radius must be positive".into()));
        }
        match self.branch {
            TestBranch::PGe2 | TestBranch::AdaptivePGe2 if b.p < 2.0 => {
                return Err(Error::InvalidConfig(format!("branch {} needs p >= 2", self.branch)));
            }
            TestBranch::PIn12 if b.p >= 2.0 => {
                return Err(Error::InvalidConfig("branch p12 needs 1 <= p < 2".into()));
            }
            _ => {}
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::InvalidConfig(format!("eta = {eta} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Components {
    pub t: f64,
    pub q: f64,
    /// Expected value of `q` when every coefficient is pure noise.
    pub q_null: f64,
    pub v0: f64,
    pub w0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub critical_value: f64,
    pub reject: bool,
    pub j_used: usize,
    pub branch: Option<TestBranch>,
    pub components: Option<Components>,
    pub eta: f64,
}

impl TestOutcome {
    fn decide(statistic: f64, critical_value: f64) -> bool {
        statistic > critical_value
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// `lambda_j = sqrt(2 ln 2^j)` for every level below `max_level`.
pub fn default_lambdas(max_level: usize) -> Vec<f64> {
    (0..max_level).map(|j| (2.0 * j as f64 * std::f64::consts::LN_2).sqrt()).collect()
}

/// Mean and variance of `(Z^2 - 1) 1{|Z| > lambda}` for standard normal `Z`.
pub fn thresholded_null_moments(lambda: f64) -> (f64, f64) {
    let n = std_normal();
    let phi = n.pdf(lambda);
    let tail = n.sf(lambda);
    let m = 2.0 * lambda * phi;
    let second = 2.0 * (lambda.powi(3) + lambda) * phi + 4.0 * tail;
    (m, second - m * m)
}

/// Wavelet coefficients of `x` divided by `sqrt(n)`, so that white noise of
/// per-sample sd `sigma` gives coefficients of sd `sigma / sqrt(n)`.
pub fn empirical_coefficients(x: &[f64], basis: BasisName, j_min: usize) -> Result<WaveletCoefficients> {
    let big_j = dyadic_level(x.len())?;
    if j_min >= big_j {
        return Err(Error::BadLevelRange { j0: j_min, max_level: big_j });
    }
    let mut c = forward_dwt_slice(x, basis, j_min)?;
    c.scale(1.0 / (x.len() as f64).sqrt());
    Ok(c)
}

/// MAD noise level of the finest detail level.
pub fn estimate_eta(c: &WaveletCoefficients) -> f64 {
    let mut abs: Vec<f64> = c.finest().iter().map(|v| v.abs()).collect();
    median_in_place(&mut abs) / MAD_CONSTANT
}

/// Coarse/fine split `j(s) = ceil(J 2s' / (2s' + 1))`, clipped to `[j_min, J - 1]`.
pub fn resolution_level(besov: &BesovClass, max_level: usize, j_min: usize) -> usize {
    let s = besov.effective_smoothness().max(0.0);
    let raw = (max_level as f64 * 2.0 * s / (2.0 * s + 1.0)).ceil() as usize;
    raw.clamp(j_min, max_level.saturating_sub(1).max(j_min))
}

pub fn compute_components(
    c: &WaveletCoefficients,
    eta: f64,
    j_min: usize,
    j_s: usize,
    lambdas: &[f64],
) -> Result<Components> {
    let big_j = c.max_level();
    if j_min < c.coarse_level() || j_s < j_min || j_s > big_j {
        return Err(Error::BadLevelRange { j0: j_min.max(j_s), max_level: big_j });
    }
    if lambdas.len() < big_j {
        return Err(Error::InvalidConfig(format!(
            "need {big_j} level thresholds, got {}",
            lambdas.len()
        )));
    }
    let eta2 = eta * eta;
    let t: f64 = (j_min..j_s)
        .flat_map(|j| c.detail(j).iter())
        .map(|th| th * th - eta2)
        .sum();
    let v0 = (2.0 * eta2 * eta2 * ((1u64 << j_s) - (1u64 << j_min)) as f64).sqrt();
    let mut q = 0.0;
    let mut q_null = 0.0;
    let mut w0_sq = 0.0;
    for j in j_s..big_j {
        let cut = eta * lambdas[j];
        q += c
            .detail(j)
            .iter()
            .filter(|th| th.abs() > cut)
            .map(|th| th * th - eta2)
            .sum::<f64>();
        let (m, v) = thresholded_null_moments(lambdas[j]);
        let count = (1u64 << j) as f64;
        q_null += count * eta2 * m;
        w0_sq += count * eta2 * eta2 * v;
    }
    Ok(Components { t, q, q_null, v0, w0: w0_sq.sqrt() })
}

fn resolve_eta(c: &WaveletCoefficients, cfg: &TestConfig) -> f64 {
    cfg.eta.unwrap_or_else(|| estimate_eta(c))
}

fn check_coefficients(c: &WaveletCoefficients, cfg: &TestConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.j_min < c.coarse_level() || cfg.j_min >= c.max_level() {
        return Err(Error::BadLevelRange { j0: cfg.j_min, max_level: c.max_level() });
    }
    Ok(())
}

pub fn nonadaptive_test(c: &WaveletCoefficients, cfg: &TestConfig) -> Result<TestOutcome> {
    if cfg.branch.is_adaptive() {
        return Err(Error::InvalidConfig(format!("{} is not a fixed-level branch", cfg.branch)));
    }
    check_coefficients(c, cfg)?;
    let eta = resolve_eta(c, cfg);
    let j_s = resolution_level(&cfg.besov, c.max_level(), cfg.j_min);
    let comp = compute_components(c, eta, cfg.j_min, j_s, &default_lambdas(c.max_level()))?;
    let z = std_normal().inverse_cdf(1.0 - cfg.alpha);
    let (statistic, critical_value) = if cfg.branch.uses_q() {
        (comp.t + comp.q - comp.q_null, (comp.v0.powi(2) + comp.w0.powi(2)).sqrt() * z)
    } else {
        (comp.t, comp.v0 * z)
    };
    Ok(TestOutcome {
        statistic,
        critical_value,
        reject: TestOutcome::decide(statistic, critical_value),
        j_used: j_s,
        branch: Some(cfg.branch),
        components: Some(comp),
        eta,
    })
}

/// Critical value `sqrt(2 ln ln eta^-2)` of the adaptive tests.
pub fn adaptive_threshold(eta: f64) -> Result<f64> {
    let inner = (eta.powi(-2)).ln();
    if !(eta > 0.0) || !(inner > 1.0) {
        return Err(Error::EtaOutOfRange(eta));
    }
    Ok((2.0 * inner.ln()).sqrt())
}

/// Standardized statistic at split level `j`, or `None` when its null
/// variance vanishes.
fn standardized(comp: &Components, uses_q: bool) -> Option<f64> {
    let (num, var) = if uses_q {
        (comp.t + comp.q - comp.q_null, comp.v0.powi(2) + comp.w0.powi(2))
    } else {
        (comp.t, comp.v0.powi(2))
    };
    (var > 0.0).then(|| num / var.sqrt())
}

pub fn adaptive_test(c: &WaveletCoefficients, cfg: &TestConfig) -> Result<TestOutcome> {
    if !cfg.branch.is_adaptive() {
        return Err(Error::InvalidConfig(format!("{} is not an adaptive branch", cfg.branch)));
    }
    check_coefficients(c, cfg)?;
    let eta = resolve_eta(c, cfg);
    let critical_value = adaptive_threshold(eta)?;
    let lambdas = default_lambdas(c.max_level());
    let mut best: Option<(f64, usize, Components)> = None;
    for j in cfg.j_min..c.max_level() {
        let comp = compute_components(c, eta, cfg.j_min, j, &lambdas)?;
        if let Some(z) = standardized(&comp, cfg.branch.uses_q()) {
            if best.as_ref().is_none_or(|(b, _, _)| z > *b) {
                best = Some((z, j, comp));
            }
        }
    }
    let (statistic, j_used, comp) = best.ok_or(Error::ZeroVariance)?;
    Ok(TestOutcome {
        statistic,
        critical_value,
        reject: TestOutcome::decide(statistic, critical_value),
        j_used,
        branch: Some(cfg.branch),
        components: Some(comp),
        eta,
    })
}

/// Dispatches to the fixed-level or adaptive test according to the branch.
pub fn run_test(c: &WaveletCoefficients, cfg: &TestConfig) -> Result<TestOutcome> {
    if cfg.branch.is_adaptive() {
        adaptive_test(c, cfg)
    } else {
        nonadaptive_test(c, cfg)
    }
}

/// Tests whether a sampled curve is constant, after removing its mean.
pub fn test_curve(x: &[f64], cfg: &TestConfig) -> Result<TestOutcome> {
    let m = mean(x);
    let centered: Vec<f64> = x.iter().map(|v| v - m).collect();
    let c = empirical_coefficients(&centered, cfg.basis, cfg.j_min)?;
    run_test(&c, cfg)
}

/// `H0: z - g` is constant in time.
pub fn test_constant_difference(z: &Signal, g: &Signal, cfg: &TestConfig) -> Result<TestOutcome> {
    if z.len() != g.len() {
        return Err(Error::LengthMismatch(z.len(), g.len()));
    }
    let d: Vec<f64> = z.samples().iter().zip(g.samples()).map(|(a, b)| a - b).collect();
    test_curve(&d, cfg)
}

/// `H0: mu == 0`. A supplied `eta` is the per-curve noise level; it is
/// rescaled to the noise level of the averaged curve.
pub fn test_time_effect(d: &FanovaDecomposition, cfg: &TestConfig) -> Result<TestOutcome> {
    let mut cfg = cfg.clone();
    cfg.eta = cfg.eta.map(|e| e / (d.r() as f64).sqrt());
    test_curve(&d.mu, &cfg)
}

/// `H0: gamma_i == 0`, one outcome per curve and without multiplicity
/// correction.
pub fn test_interactions(d: &FanovaDecomposition, cfg: &TestConfig) -> Result<Vec<TestOutcome>> {
    let mut cfg = cfg.clone();
    let r = d.r() as f64;
    cfg.eta = cfg.eta.map(|e| e * (1.0 - 1.0 / r).sqrt());
    d.gamma.iter().map(|g| test_curve(g, &cfg)).collect()
}

/// Classical chi-square test of `H0: a_i = 0` with known per-sample noise
/// variance.
pub fn test_main_effects_parametric(
    d: &FanovaDecomposition,
    noise_var: f64,
    alpha: f64,
) -> Result<TestOutcome> {
    if d.r() < 2 {
        return Err(Error::NeedTwoCurves(d.r()));
    }
    if !(noise_var > 0.0) {
        return Err(Error::InvalidConfig(format!("noise variance {noise_var} must be positive")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let statistic = d.n() as f64 * d.a.iter().map(|a| a * a).sum::<f64>() / noise_var;
    let chi = ChiSquared::new((d.r() - 1) as f64).expect("positive degrees of freedom");
    let critical_value = chi.inverse_cdf(1.0 - alpha);
    Ok(TestOutcome {
        statistic,
        critical_value,
        reject: TestOutcome::decide(statistic, critical_value),
        j_used: 0,
        branch: None,
        components: None,
        eta: noise_var.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fanova::{decompose, CurveSet};
    use crate::rng::stream;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_pyramid(j_min: usize, big_j: usize, eta: f64, seed: u64) -> WaveletCoefficients {
        let mut rng = stream(seed, 0, 0);
        let mut c = WaveletCoefficients::zeros(j_min, big_j).unwrap();
        for j in j_min..big_j {
            for v in c.detail_mut(j) {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v = eta * z;
            }
        }
        c
    }

    #[test]
    fn zero_coefficients() {
        let c = WaveletCoefficients::zeros(3, 8).unwrap();
        let comp = compute_components(&c, 1.0, 3, 6, &default_lambdas(8)).unwrap();
        assert_eq!(comp.t, -((1 << 6) - (1 << 3)) as f64);
        assert_eq!(comp.q, 0.0);
    }

    #[test]
    fn zero_eta_keeps_all_energy() {
        let c = gaussian_pyramid(3, 8, 0.3, 1);
        let comp = compute_components(&c, 0.0, 3, 5, &default_lambdas(8)).unwrap();
        let coarse: f64 = (3..5).flat_map(|j| c.detail(j)).map(|v| v * v).sum();
        let fine: f64 = (5..8).flat_map(|j| c.detail(j)).map(|v| v * v).sum();
        assert!((comp.t - coarse).abs() < 1e-12);
        assert!((comp.q - fine).abs() < 1e-12);
    }

    #[test]
    fn level_range_errors() {
        let c = WaveletCoefficients::zeros(3, 8).unwrap();
        assert!(compute_components(&c, 1.0, 3, 9, &default_lambdas(8)).is_err());
        assert!(compute_components(&c, 1.0, 2, 5, &default_lambdas(8)).is_err());
        assert!(compute_components(&c, 1.0, 5, 4, &default_lambdas(8)).is_err());
    }

    #[test]
    fn t_over_v0_is_standardized_under_null() {
        let reps = 10_000;
        let eta = 0.05;
        let lambdas = default_lambdas(8);
        let ratios: Vec<f64> = (0..reps)
            .map(|r| {
                let c = gaussian_pyramid(3, 8, eta, 1000 + r);
                let comp = compute_components(&c, eta, 3, 7, &lambdas).unwrap();
                comp.t / comp.v0
            })
            .collect();
        let m = mean(&ratios);
        let var = ratios.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (reps - 1) as f64;
        assert!(m.abs() < 0.05, "mean {m}");
        assert!((0.85..=1.15).contains(&var), "variance {var}");
    }

    #[test]
    fn thresholded_moments_match_monte_carlo() {
        let mut rng = stream(77, 0, 0);
        for lambda in [0.0, 1.0, (2.0 * 6.0 * std::f64::consts::LN_2).sqrt()] {
            let draws = 200_000;
            let ys: Vec<f64> = (0..draws)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    if z.abs() > lambda { z * z - 1.0 } else { 0.0 }
                })
                .collect();
            let m = mean(&ys);
            let v = ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (draws - 1) as f64;
            let (em, ev) = thresholded_null_moments(lambda);
            assert!((m - em).abs() < 4.0 * (ev / draws as f64).sqrt() + 1e-12, "{lambda}: {m} vs {em}");
            assert!((v - ev).abs() < 0.03 * ev.max(0.1), "{lambda}: {v} vs {ev}");
        }
        let (m0, v0) = thresholded_null_moments(0.0);
        assert!(m0.abs() < 1e-15 && (v0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_threshold_value() {
        assert!((adaptive_threshold(0.1).unwrap() - 1.7477).abs() < 1e-3);
        assert_eq!(adaptive_threshold(0.7).unwrap_err(), Error::EtaOutOfRange(0.7));
        assert!(adaptive_threshold(0.0).is_err());
    }

    #[test]
    fn adaptive_never_rejects_zero() {
        let c = WaveletCoefficients::zeros(3, 9).unwrap();
        for branch in [TestBranch::AdaptiveGeneral, TestBranch::AdaptivePGe2] {
            let out = adaptive_test(&c, &TestConfig::new(branch).with_eta(0.05)).unwrap();
            assert!(out.statistic < 0.0);
            assert!(!out.reject);
        }
    }

    #[test]
    fn adaptive_finds_large_coefficient() {
        let mut c = gaussian_pyramid(3, 9, 0.05, 3);
        c.detail_mut(6)[10] = 5.0;
        let cfg = TestConfig::new(TestBranch::AdaptivePGe2).with_eta(0.05);
        let out = adaptive_test(&c, &cfg).unwrap();
        assert!(out.reject);
        assert!(out.j_used >= 7, "spike at level 6 enters T from split 7 on");
    }

    #[test]
    fn scale_consistency() {
        let c = gaussian_pyramid(3, 9, 0.1, 4);
        let cfg = TestConfig::new(TestBranch::PGe2).with_eta(0.1);
        let base = nonadaptive_test(&c, &cfg).unwrap();
        let mut scaled = c.clone();
        scaled.scale(3.0);
        let out = nonadaptive_test(&scaled, &cfg.clone().with_eta(0.3)).unwrap();
        assert!((out.statistic - 9.0 * base.statistic).abs() < 1e-9 * base.statistic.abs().max(1.0));
        assert_eq!(out.reject, base.reject);
    }

    #[test]
    fn resolution_split() {
        let b = BesovClass { p: 2.0, q: 2.0, s: 1.0, radius: 1.0 };
        assert_eq!(resolution_level(&b, 10, 3), 7);
        let rough = BesovClass { p: 1.0, q: 2.0, s: 1.5, radius: 1.0 };
        assert_eq!(resolution_level(&rough, 9, 3), 6);
        let tiny = BesovClass { p: 2.0, q: 2.0, s: 0.01, radius: 1.0 };
        assert_eq!(resolution_level(&tiny, 10, 3), 3);
    }

    #[test]
    fn config_validation() {
        assert!(TestConfig::new(TestBranch::PGe2).with_alpha(1.5).validate().is_err());
        let mut cfg = TestConfig::new(TestBranch::PIn12);
        cfg.besov.p = 2.0;
        assert!(cfg.validate().is_err());
        let mut cfg = TestConfig::new(TestBranch::PGe2);
        cfg.besov.s = 0.4;
        assert!(cfg.validate().is_err());
        assert!("bogus".parse::<TestBranch>().is_err());
        for b in [TestBranch::PGe2, TestBranch::PIn12, TestBranch::AdaptiveGeneral, TestBranch::AdaptivePGe2] {
            assert_eq!(b.as_str().parse::<TestBranch>().unwrap(), b);
        }
    }

    #[test]
    fn constant_shift_is_not_rejected() {
        let g = Signal::new((0..256).map(|t| (t as f64 / 20.0).sin()).collect()).unwrap();
        let z = Signal::new(g.samples().iter().map(|v| v + 5.0).collect()).unwrap();
        let out = test_constant_difference(&z, &g, &TestConfig::new(TestBranch::PGe2).with_eta(0.01)).unwrap();
        assert!(!out.reject);
        assert!(out.statistic < 0.0);
    }

    #[test]
    fn parametric_main_effects() {
        let flat = CurveSet::new(vec![vec![1.0; 16], vec![1.0; 16]]).unwrap();
        let out = test_main_effects_parametric(&decompose(&flat).unwrap(), 1.0, 0.05).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert!(!out.reject);
        let apart = CurveSet::new(vec![vec![2.0; 16], vec![-2.0; 16]]).unwrap();
        let out = test_main_effects_parametric(&decompose(&apart).unwrap(), 1.0, 0.05).unwrap();
        assert!((out.statistic - 128.0).abs() < 1e-9);
        assert!(out.reject);
        assert!((out.critical_value - 3.841459).abs() < 1e-5);
    }
}
