use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// The three orthonormal bases used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisName {
    /// Daubechies extremal phase, 3 vanishing moments (6 taps).
    Db3,
    /// Daubechies extremal phase, 6 vanishing moments (12 taps).
    Db6,
    /// Least-asymmetric Symlet, 8 vanishing moments (16 taps).
    Sym8,
}

impl BasisName {
    pub const ALL: [BasisName; 3] = [BasisName::Db3, BasisName::Db6, BasisName::Sym8];

    pub fn as_str(self) -> &'static str {
        match self {
            BasisName::Db3 => "db3",
            BasisName::Db6 => "db6",
            BasisName::Sym8 => "sym8",
        }
    }

    pub fn vanishing_moments(self) -> usize {
        match self {
            BasisName::Db3 => 3,
            BasisName::Db6 => 6,
            BasisName::Sym8 => 8,
        }
    }

    fn scaling_filter(self) -> &'static [f64] {
        match self {
            BasisName::Db3 => &DB3,
            BasisName::Db6 => &DB6,
            BasisName::Sym8 => &SYM8,
        }
    }
}

impl fmt::Display for BasisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BasisName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "db3" => Ok(BasisName::Db3),
            "db6" => Ok(BasisName::Db6),
            "sym8" => Ok(BasisName::Sym8),
            other => Err(Error::UnknownName(format!("wavelet basis '{other}'"))),
        }
    }
}

/// Orthonormal two-channel filter bank.
///
/// `highpass[k] = (-1)^k * lowpass[L - 1 - k]` with `L` the filter length.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair {
    pub lowpass: Vec<f64>,
    pub highpass: Vec<f64>,
}

impl FilterPair {
    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass.is_empty()
    }
}

pub fn wavelet_filters(basis: BasisName) -> FilterPair {
    let lowpass = basis.scaling_filter().to_vec();
    let l = lowpass.len();
    let highpass = (0..l)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * lowpass[l - 1 - k]
        })
        .collect();
    FilterPair { lowpass, highpass }
}

// Scaling (reconstruction lowpass) filters, normalized to sum sqrt(2).
// Obtained by spectral factorization of the Daubechies polynomial in
// 60-digit arithmetic: minimum-phase roots for db3/db6, the least-asymmetric
// root set for sym8. tests/filters.rs re-derives db3 and db6 independently.

const DB3: [f64; 6] = [
    0.332670552950082615999,
    0.806891509311092576494,
    0.459877502118491570095,
    -0.135011020010254588696,
    -0.0854412738820266616928,
    0.0352262918857095366027,
];

const DB6: [f64; 12] = [
    0.111540743350109463621,
    0.494623890398453085677,
    0.751133908021095350679,
    0.315250351709197629086,
    -0.226264693965439820076,
    -0.129766867567261935562,
    0.0975016055873230491023,
    0.0275228655303057286255,
    -0.0315820393174860295651,
    0.000553842201161496139252,
    0.00477725751094551063964,
    -0.00107730108530847956485,
];

const SYM8: [f64; 16] = [
    0.00188995033276768918427,
    -0.000302920514724133081264,
    -0.0149522583370621991185,
    0.00380875201389448946307,
    0.0491371796737302867869,
    -0.027219029917103486322,
    -0.0519458381078818007357,
    0.36444189483617893676,
    0.777185751699628028624,
    0.48135965125905339159,
    -0.061273359067811077843,
    -0.143294238351272662844,
    0.00760748732497660819192,
    0.0316950878115259914314,
    -0.000542132331800010689348,
    -0.00338241595100500259546,
];
