//! Wavelet estimation and functional ANOVA testing for curves observed under
//! CAR(1) (Ornstein-Uhlenbeck) errors.

pub mod car1;
pub mod cli;
pub mod cochrane_orcutt;
pub mod dwt;
pub mod error;
pub mod fanova;
pub mod rng;
pub mod shrinkage;
pub mod signal;

pub use error::{Error, Result};
pub use signal::Signal;
pub mod simlab;
