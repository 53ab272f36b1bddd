//! Closed forms of the twelve benchmark functions on `[0, 1]`.
//!
//! Doppler, HeaviSine, Bumps and Blocks follow Donoho and Johnstone; the
//! remaining eight follow the Antoniadis-Bigot-Sapatinas comparative suite
//! (Cusp as in WaveLab). Amplitudes are immaterial because studies rescale to
//! a target signal-to-noise ratio. Sampling uses the midpoints
//! `t_k = (k + 1/2) / n`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::signal::{dyadic_level, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TestFunctionName {
    Doppler,
    HeaviSine,
    Bumps,
    Blocks,
    Spikes,
    Blip,
    Corner,
    Wave,
    Angles,
    Parabolas,
    TimeShiftedSine,
    Cusp,
    /// `sin(2 pi t)`, the smooth reference of the rank study. Not part of
    /// [`TestFunctionName::ALL`].
    Sine,
}

impl TestFunctionName {
    pub const ALL: [TestFunctionName; 12] = [
        TestFunctionName::Doppler,
        TestFunctionName::HeaviSine,
        TestFunctionName::Bumps,
        TestFunctionName::Blocks,
        TestFunctionName::Spikes,
        TestFunctionName::Blip,
        TestFunctionName::Corner,
        TestFunctionName::Wave,
        TestFunctionName::Angles,
        TestFunctionName::Parabolas,
        TestFunctionName::TimeShiftedSine,
        TestFunctionName::Cusp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TestFunctionName::Doppler => "doppler",
            TestFunctionName::HeaviSine => "heavisine",
            TestFunctionName::Bumps => "bumps",
            TestFunctionName::Blocks => "blocks",
            TestFunctionName::Spikes => "spikes",
            TestFunctionName::Blip => "blip",
            TestFunctionName::Corner => "corner",
            TestFunctionName::Wave => "wave",
            TestFunctionName::Angles => "angles",
            TestFunctionName::Parabolas => "parabolas",
            TestFunctionName::TimeShiftedSine => "time_shifted_sine",
            TestFunctionName::Cusp => "cusp",
            TestFunctionName::Sine => "sine",
        }
    }

    /// Two-letter code used in summary tables.
    pub fn code(self) -> &'static str {
        match self {
            TestFunctionName::Doppler => "Do",
            TestFunctionName::HeaviSine => "He",
            TestFunctionName::Bumps => "Bu",
            TestFunctionName::Blocks => "Bk",
            TestFunctionName::Spikes => "Sp",
            TestFunctionName::Blip => "Bp",
            TestFunctionName::Corner => "Co",
            TestFunctionName::Wave => "Wa",
            TestFunctionName::Angles => "An",
            TestFunctionName::Parabolas => "Pa",
            TestFunctionName::TimeShiftedSine => "Ts",
            TestFunctionName::Cusp => "Cu",
            TestFunctionName::Sine => "Si",
        }
    }

    pub fn eval(self, t: f64) -> f64 {
        match self {
            TestFunctionName::Doppler => doppler(t),
            TestFunctionName::HeaviSine => heavisine(t),
            TestFunctionName::Bumps => bumps(t),
            TestFunctionName::Blocks => blocks(t),
            TestFunctionName::Spikes => spikes(t),
            TestFunctionName::Blip => blip(t),
            TestFunctionName::Corner => corner(t),
            TestFunctionName::Wave => 0.5 + 0.2 * (4.0 * PI * t).cos() + 0.1 * (24.0 * PI * t).cos(),
            TestFunctionName::Angles => angles(t),
            TestFunctionName::Parabolas => parabolas(t),
            TestFunctionName::TimeShiftedSine => {
                let u = (1.0 - (PI * t).cos()) / 2.0;
                0.3 * (3.0 * PI * (u + t)).sin() + 0.5
            }
            TestFunctionName::Cusp => (t - 0.37).abs().sqrt(),
            TestFunctionName::Sine => (2.0 * PI * t).sin(),
        }
    }
}

impl fmt::Display for TestFunctionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestFunctionName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect();
        TestFunctionName::ALL
            .into_iter()
            .chain([TestFunctionName::Sine])
            .find(|f| f.as_str().replace('_', "") == key || f.code().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::UnknownName(format!("test function '{s}'")))
    }
}

pub fn grid_point(k: usize, n: usize) -> f64 {
    (k as f64 + 0.5) / n as f64
}

pub fn make_test_function(name: TestFunctionName, n: usize) -> Result<Signal> {
    sample_on_grid(n, |t| name.eval(t))
}

/// `sin(2 pi t)` on the midpoint grid.
pub fn make_sine(n: usize) -> Result<Signal> {
    make_test_function(TestFunctionName::Sine, n)
}

fn sample_on_grid(n: usize, f: impl Fn(f64) -> f64) -> Result<Signal> {
    dyadic_level(n)?;
    Signal::new((0..n).map(|k| f(grid_point(k, n))).collect())
}

fn doppler(t: f64) -> f64 {
    (t * (1.0 - t)).sqrt() * (2.0 * PI * 1.05 / (t + 0.05)).sin()
}

fn heavisine(t: f64) -> f64 {
    4.0 * (4.0 * PI * t).sin() - (t - 0.3).signum() - (0.72 - t).signum()
}

const BUMP_POS: [f64; 11] = [0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81];
const BUMP_HEIGHT: [f64; 11] = [4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2];
const BUMP_WIDTH: [f64; 11] = [0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005];
pub(crate) const BLOCK_HEIGHT: [f64; 11] = [4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2];

/// Jump locations of Blocks (shared with Bumps' centers).
pub fn block_jumps() -> &'static [f64; 11] {
    &BUMP_POS
}

fn bumps(t: f64) -> f64 {
    BUMP_POS
        .iter()
        .zip(BUMP_HEIGHT.iter().zip(&BUMP_WIDTH))
        .map(|(p, (h, w))| h * (1.0 + ((t - p) / w).abs()).powi(-4))
        .sum()
}

fn blocks(t: f64) -> f64 {
    BUMP_POS
        .iter()
        .zip(&BLOCK_HEIGHT)
        .map(|(p, h)| if t > *p { *h } else if t == *p { 0.5 * h } else { 0.0 })
        .sum()
}

fn spikes(t: f64) -> f64 {
    let g = |c: f64, s: f64| (-s * (t - c) * (t - c)).exp();
    15.6676
        * (g(0.23, 500.0)
            + 2.0 * g(0.33, 2000.0)
            + 4.0 * g(0.47, 8000.0)
            + 3.0 * g(0.69, 16000.0)
            + g(0.83, 32000.0))
}

fn blip(t: f64) -> f64 {
    if t <= 0.8 {
        0.32 + 0.6 * t + 0.3 * (-100.0 * (t - 0.3).powi(2)).exp()
    } else {
        -0.28 + 0.6 * t + 0.3 * (-100.0 * (t - 1.3).powi(2)).exp()
    }
}

fn corner(t: f64) -> f64 {
    if t <= 0.5 {
        623.87 * t.powi(3) * (1.0 - 2.0 * t)
    } else if t <= 0.8 {
        187.161 * (0.125 - t.powi(3)) * t.powi(4)
    } else {
        3708.470441 * (t - 1.0).powi(3)
    }
}

fn angles(t: f64) -> f64 {
    if t <= 0.15 {
        2.0 * t + 0.5
    } else if t <= 0.2 {
        -12.0 * (t - 0.15) + 0.8
    } else if t <= 0.5 {
        0.2
    } else if t <= 0.6 {
        6.0 * (t - 0.5) + 0.2
    } else if t <= 0.65 {
        -10.0 * (t - 0.6) + 0.8
    } else if t <= 0.85 {
        -0.5 * (t - 0.65) + 0.3
    } else {
        2.0 * (t - 0.85) + 0.2
    }
}

fn parabolas(t: f64) -> f64 {
    let r = |s: f64| if s >= 0.0 { s * s } else { 0.0 };
    0.8 - 30.0 * r(t - 0.1) + 60.0 * r(t - 0.2) - 30.0 * r(t - 0.3) + 500.0 * r(t - 0.35)
        - 1000.0 * r(t - 0.37)
        + 1000.0 * r(t - 0.41)
        - 500.0 * r(t - 0.43)
        + 7.5 * r(t - 0.5)
        - 15.0 * r(t - 0.7)
        + 7.5 * r(t - 0.9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doppler_midpoint() {
        // sqrt(0.25) sin(2 pi 1.05 / 0.55) = 0.5 sin(11.99517...) = -0.27032...
        let v = TestFunctionName::Doppler.eval(0.5);
        assert!((v - 0.5 * (2.0 * PI * 1.05 / 0.55).sin()).abs() < 1e-15);
        assert!((v + 0.270_320_4).abs() < 1e-7, "{v}");
    }

    #[test]
    fn blocks_jump_only_at_listed_points() {
        let n = 2048;
        let f = make_test_function(TestFunctionName::Blocks, n).unwrap();
        let jumps = f.samples().windows(2).filter(|w| (w[1] - w[0]).abs() > 1e-12).count();
        assert!(jumps <= 11 && jumps > 0, "{jumps}");
    }

    #[test]
    fn all_functions_finite() {
        for name in TestFunctionName::ALL {
            let f = make_test_function(name, 512).unwrap();
            assert_eq!(f.len(), 512);
            assert!(f.sd() > 0.0, "{name} is flat");
        }
        assert!(make_test_function(TestFunctionName::Cusp, 500).is_err());
    }

    #[test]
    fn names_round_trip() {
        for name in TestFunctionName::ALL {
            assert_eq!(name.as_str().parse::<TestFunctionName>().unwrap(), name);
            assert_eq!(name.code().parse::<TestFunctionName>().unwrap(), name);
        }
        assert_eq!("Time Shifted Sine".parse::<TestFunctionName>().unwrap(), TestFunctionName::TimeShiftedSine);
        assert!("sawtooth".parse::<TestFunctionName>().is_err());
    }
}
