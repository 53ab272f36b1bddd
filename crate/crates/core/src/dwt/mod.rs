//! Periodized orthogonal discrete wavelet transform (Mallat pyramid).
//!
//! Conventions, fixed so that the `(j, k)` to time mapping is reproducible:
//!
//! * one analysis step maps `x` (length `m`) to
//!   `a[k] = sum_i h[i] x[(2k + i) mod m]` and
//!   `d[k] = sum_i g[i] x[(2k + i) mod m]`, i.e. the filter is anchored at
//!   index 0 and the signal is treated as periodic at every level;
//! * detail level `j` holds `2^j` coefficients and the coarse scaling block at
//!   level `j0` holds `2^j0`;
//! * synthesis is the exact adjoint, so the transform matrix is orthogonal.

mod filters;

pub use filters::{wavelet_filters, BasisName, FilterPair};

use crate::error::{Error, Result};
use crate::signal::{dyadic_level, Signal};

/// Scaling coefficients at `coarse_level` plus detail levels
/// `coarse_level..max_level`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoefficients {
    coarse_level: usize,
    max_level: usize,
    scaling: Vec<f64>,
    details: Vec<Vec<f64>>,
}

impl WaveletCoefficients {
    /// Assembles a pyramid, checking every per-level length.
    pub fn from_parts(
        coarse_level: usize,
        max_level: usize,
        scaling: Vec<f64>,
        details: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if coarse_level >= max_level {
            return Err(Error::MalformedPyramid(format!(
                "coarse level {coarse_level} not below max level {max_level}"
            )));
        }
        if scaling.len() != 1 << coarse_level {
            return Err(Error::MalformedPyramid(format!(
                "scaling block has {} entries, expected {}",
                scaling.len(),
                1usize << coarse_level
            )));
        }
        if details.len() != max_level - coarse_level {
            return Err(Error::MalformedPyramid(format!(
                "{} detail levels, expected {}",
                details.len(),
                max_level - coarse_level
            )));
        }
        for (i, d) in details.iter().enumerate() {
            let j = coarse_level + i;
            if d.len() != 1 << j {
                return Err(Error::MalformedPyramid(format!(
                    "detail level {j} has {} entries, expected {}",
                    d.len(),
                    1usize << j
                )));
            }
        }
        Ok(Self {
            coarse_level,
            max_level,
            scaling,
            details,
        })
    }

    /// All-zero pyramid for a signal of length `2^max_level`.
    pub fn zeros(coarse_level: usize, max_level: usize) -> Result<Self> {
        Self::from_parts(
            coarse_level,
            max_level,
            vec![0.0; 1 << coarse_level],
            (coarse_level..max_level).map(|j| vec![0.0; 1 << j]).collect(),
        )
    }

    pub fn coarse_level(&self) -> usize {
        self.coarse_level
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn len(&self) -> usize {
        1 << self.max_level
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn scaling(&self) -> &[f64] {
        &self.scaling
    }

    pub fn scaling_mut(&mut self) -> &mut [f64] {
        &mut self.scaling
    }

    /// Detail coefficients at level `j`; panics outside `coarse_level..max_level`.
    pub fn detail(&self, j: usize) -> &[f64] {
        assert!(
            (self.coarse_level..self.max_level).contains(&j),
            "detail level {j} outside {}..{}",
            self.coarse_level,
            self.max_level
        );
        &self.details[j - self.coarse_level]
    }

    pub fn detail_mut(&mut self, j: usize) -> &mut [f64] {
        assert!(
            (self.coarse_level..self.max_level).contains(&j),
            "detail level {j} outside {}..{}",
            self.coarse_level,
            self.max_level
        );
        &mut self.details[j - self.coarse_level]
    }

    pub fn finest(&self) -> &[f64] {
        self.details.last().expect("at least one detail level")
    }

    /// `(level, coefficients)` pairs from coarse to fine.
    pub fn detail_levels(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.details
            .iter()
            .enumerate()
            .map(move |(i, d)| (self.coarse_level + i, d.as_slice()))
    }

    pub fn energy(&self) -> f64 {
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        sq(&self.scaling) + self.details.iter().map(|d| sq(d)).sum::<f64>()
    }

    /// Scaling block followed by details, coarse to fine.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.scaling);
        for d in &self.details {
            out.extend_from_slice(d);
        }
        out
    }

    pub fn scale(&mut self, factor: f64) {
        self.scaling.iter_mut().for_each(|x| *x *= factor);
        for d in &mut self.details {
            d.iter_mut().for_each(|x| *x *= factor);
        }
    }
}

fn analysis_step(x: &[f64], filters: &FilterPair, approx: &mut Vec<f64>, detail: &mut Vec<f64>) {
    let m = x.len();
    let half = m / 2;
    approx.clear();
    detail.clear();
    let h = &filters.lowpass;
    let g = &filters.highpass;
    for k in 0..half {
        let start = 2 * k;
        let (mut a, mut d) = (0.0, 0.0);
        if start + h.len() <= m {
            let window = &x[start..start + h.len()];
            for ((xi, hi), gi) in window.iter().zip(h).zip(g) {
                a += hi * xi;
                d += gi * xi;
            }
        } else {
            for (i, (hi, gi)) in h.iter().zip(g).enumerate() {
                let xi = x[(start + i) % m];
                a += hi * xi;
                d += gi * xi;
            }
        }
        approx.push(a);
        detail.push(d);
    }
}

fn synthesis_step(approx: &[f64], detail: &[f64], filters: &FilterPair, out: &mut Vec<f64>) {
    let m = approx.len() * 2;
    out.clear();
    out.resize(m, 0.0);
    let h = &filters.lowpass;
    let g = &filters.highpass;
    for (k, (a, d)) in approx.iter().zip(detail).enumerate() {
        let start = 2 * k;
        if start + h.len() <= m {
            for (i, (hi, gi)) in h.iter().zip(g).enumerate() {
                out[start + i] += hi * a + gi * d;
            }
        } else {
            for (i, (hi, gi)) in h.iter().zip(g).enumerate() {
                out[(start + i) % m] += hi * a + gi * d;
            }
        }
    }
}

/// Forward transform of a raw sample slice.
pub fn forward_dwt_slice(x: &[f64], basis: BasisName, j0: usize) -> Result<WaveletCoefficients> {
    let max_level = dyadic_level(x.len())?;
    if j0 >= max_level {
        return Err(Error::BadLevelRange { j0, max_level });
    }
    let filters = wavelet_filters(basis);
    let mut details = vec![Vec::new(); max_level - j0];
    let mut current = x.to_vec();
    let mut approx = Vec::with_capacity(x.len() / 2);
    for j in (j0..max_level).rev() {
        let mut detail = Vec::with_capacity(1 << j);
        analysis_step(&current, &filters, &mut approx, &mut detail);
        details[j - j0] = detail;
        std::mem::swap(&mut current, &mut approx);
    }
    WaveletCoefficients::from_parts(j0, max_level, current, details)
}

pub fn forward_dwt(x: &Signal, basis: BasisName, j0: usize) -> Result<WaveletCoefficients> {
    forward_dwt_slice(x.samples(), basis, j0)
}

/// Inverse transform back to raw samples.
pub fn inverse_dwt_vec(c: &WaveletCoefficients, basis: BasisName) -> Vec<f64> {
    let filters = wavelet_filters(basis);
    let mut current = c.scaling.clone();
    let mut next = Vec::with_capacity(c.len());
    for d in &c.details {
        synthesis_step(&current, d, &filters, &mut next);
        std::mem::swap(&mut current, &mut next);
    }
    current
}

/// Inverse transform onto the unit-interval grid.
///
/// Pyramids built through [`WaveletCoefficients::from_parts`] are always
/// well formed, so the only error path is non-finite input coefficients.
pub fn inverse_dwt(c: &WaveletCoefficients, basis: BasisName) -> Result<Signal> {
    Signal::new(inverse_dwt_vec(c, basis))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(seed: u64, n: usize) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn constant_signal_has_no_details() {
        for basis in BasisName::ALL {
            let x = vec![2.5; 64];
            let c = forward_dwt_slice(&x, basis, 2).unwrap();
            for (_, d) in c.detail_levels() {
                assert!(d.iter().all(|v| v.abs() < 1e-12));
            }
            let expect = 2.5 * 2f64.powf((6.0 - 2.0) / 2.0);
            assert!(c.scaling().iter().all(|v| (v - expect).abs() < 1e-12));
        }
    }

    #[test]
    fn round_trip_n16() {
        for basis in BasisName::ALL {
            let x = lcg(7, 16);
            for j0 in 0..4 {
                let c = forward_dwt_slice(&x, basis, j0).unwrap();
                let y = inverse_dwt_vec(&c, basis);
                for (a, b) in x.iter().zip(&y) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn level_errors() {
        assert_eq!(
            forward_dwt_slice(&[0.0; 12], BasisName::Db3, 0).unwrap_err(),
            Error::NonDyadicLength(12)
        );
        assert_eq!(
            forward_dwt_slice(&[0.0; 16], BasisName::Db3, 4).unwrap_err(),
            Error::BadLevelRange { j0: 4, max_level: 4 }
        );
    }

    #[test]
    fn malformed_pyramid_rejected() {
        let err = WaveletCoefficients::from_parts(1, 3, vec![0.0; 2], vec![vec![0.0; 2], vec![0.0; 3]])
            .unwrap_err();
        assert!(matches!(err, Error::MalformedPyramid(_)));
        let err = WaveletCoefficients::from_parts(1, 3, vec![0.0; 3], vec![vec![0.0; 2], vec![0.0; 4]])
            .unwrap_err();
        assert!(matches!(err, Error::MalformedPyramid(_)));
    }

    #[test]
    fn zero_pyramid_inverts_to_zero() {
        let c = WaveletCoefficients::zeros(2, 7).unwrap();
        let x = inverse_dwt(&c, BasisName::Sym8).unwrap();
        assert_eq!(x.len(), 128);
        assert!(x.samples().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn unit_detail_is_unit_norm_wavelet() {
        for basis in BasisName::ALL {
            let mut c = WaveletCoefficients::zeros(3, 8).unwrap();
            c.detail_mut(5)[7] = 1.0;
            let psi = inverse_dwt_vec(&c, basis);
            let norm: f64 = psi.iter().map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-10);
            let back = forward_dwt_slice(&psi, basis, 3).unwrap();
            assert!((back.detail(5)[7] - 1.0).abs() < 1e-10);
        }
    }
}
