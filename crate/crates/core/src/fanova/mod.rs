//! Functional ANOVA: the fixed-effects decomposition
//! `f_i(t) = m0 + mu(t) + a_i + gamma_i(t)` and wavelet tests for its terms.

mod testing;

pub use testing::*;

use crate::cochrane_orcutt::prewhiten_slice;
use crate::error::{Error, Result};
use crate::signal::{dyadic_level, mean};

/// `r` curves sampled on a common dyadic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSet {
    curves: Vec<Vec<f64>>,
    dt: f64,
}

impl CurveSet {
    pub fn new(curves: Vec<Vec<f64>>) -> Result<Self> {
        let n = curves.first().map_or(0, Vec::len);
        Self::with_dt(curves, 1.0 / n.max(1) as f64)
    }

    pub fn with_dt(curves: Vec<Vec<f64>>, dt: f64) -> Result<Self> {
        if curves.len() < 2 {
            return Err(Error::NeedTwoCurves(curves.len()));
        }
        let n = curves[0].len();
        dyadic_level(n)?;
        for c in &curves {
            if c.len() != n {
                return Err(Error::LengthMismatch(c.len(), n));
            }
            if let Some(i) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt = {dt} must be positive")));
        }
        Ok(Self { curves, dt })
    }

    pub fn curves(&self) -> &[Vec<f64>] {
        &self.curves
    }

    pub fn r(&self) -> usize {
        self.curves.len()
    }

    pub fn n(&self) -> usize {
        self.curves[0].len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Applies the same-length AR(1) prewhitening to every curve.
    pub fn prewhiten(&self, rho: f64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(Error::NonStationaryRho(rho));
        }
        Ok(Self {
            curves: self.curves.iter().map(|c| prewhiten_slice(c, rho)).collect(),
            dt: self.dt,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FanovaDecomposition {
    /// Grand mean.
    pub m0: f64,
    /// Main effect in time; averages to zero.
    pub mu: Vec<f64>,
    /// Curve main effects; sum to zero.
    pub a: Vec<f64>,
    /// Interactions; zero column sums and zero row means.
    pub gamma: Vec<Vec<f64>>,
}

impl FanovaDecomposition {
    pub fn r(&self) -> usize {
        self.a.len()
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        self.gamma
            .iter()
            .zip(&self.a)
            .map(|(g, a)| {
                g.iter()
                    .zip(&self.mu)
                    .map(|(gt, mt)| self.m0 + mt + a + gt)
                    .collect()
            })
            .collect()
    }
}

pub fn decompose(curves: &CurveSet) -> Result<FanovaDecomposition> {
    let rows = curves.curves();
    if rows.len() < 2 {
        return Err(Error::NeedTwoCurves(rows.len()));
    }
    let r = rows.len() as f64;
    let n = rows[0].len();
    let row_means: Vec<f64> = rows.iter().map(|c| mean(c)).collect();
    let m0 = mean(&row_means);
    let col_means: Vec<f64> = (0..n).map(|t| rows.iter().map(|c| c[t]).sum::<f64>() / r).collect();
    let a: Vec<f64> = row_means.iter().map(|m| m - m0).collect();
    let mu: Vec<f64> = col_means.iter().map(|m| m - m0).collect();
    let gamma = rows
        .iter()
        .zip(&a)
        .map(|(c, ai)| {
            c.iter()
                .zip(&mu)
                .map(|(v, mt)| v - m0 - ai - mt)
                .collect()
        })
        .collect();
    Ok(FanovaDecomposition { m0, mu, a, gamma })
}
