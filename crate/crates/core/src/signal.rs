use crate::error::{Error, Result};

/// Equally spaced real samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    origin_time: f64,
    dt: f64,
}

impl Signal {
    /// Wraps samples on the unit interval grid (`dt = 1/n`, origin 0).
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        let n = samples.len().max(1);
        Self::with_timing(samples, 0.0, 1.0 / n as f64)
    }

    pub fn with_timing(samples: Vec<f64>, origin_time: f64, dt: f64) -> Result<Self> {
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            samples,
            origin_time,
            dt,
        })
    }

    /// Same timing as `self`, new values. Callers guarantee finiteness.
    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Self {
        debug_assert!(samples.iter().all(|x| x.is_finite()));
        Self {
            samples,
            origin_time: self.origin_time,
            dt: self.dt,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn origin_time(&self) -> f64 {
        self.origin_time
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `log2(len)` when the length is a power of two.
    pub fn dyadic_level(&self) -> Result<usize> {
        dyadic_level(self.samples.len())
    }

    pub fn mean(&self) -> f64 {
        mean(&self.samples)
    }

    /// Sample standard deviation (n - 1 denominator).
    pub fn sd(&self) -> f64 {
        sample_sd(&self.samples)
    }
}

pub(crate) fn dyadic_level(n: usize) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NonDyadicLength(n));
    }
    Ok(n.trailing_zeros() as usize)
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

pub(crate) fn sample_sd(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    let ss: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (x.len() - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert_eq!(Signal::new(vec![1.0, f64::NAN]), Err(Error::NonFinite(1)));
        assert_eq!(
            Signal::new(vec![f64::INFINITY]),
            Err(Error::NonFinite(0))
        );
    }

    #[test]
    fn unit_interval_timing() {
        let s = Signal::new(vec![0.0; 8]).unwrap();
        assert_eq!(s.dt(), 0.125);
        assert_eq!(s.dyadic_level().unwrap(), 3);
        assert_eq!(
            Signal::new(vec![0.0; 6]).unwrap().dyadic_level(),
            Err(Error::NonDyadicLength(6))
        );
    }

    #[test]
    fn sd_uses_unbiased_denominator() {
        let s = Signal::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((s.sd() - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
