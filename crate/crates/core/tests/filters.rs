//! Re-derives the Daubechies filters from scratch in double precision and
//! compares them with the shipped constants.

use num_complex::Complex64;
use proptest::prelude::*;
use wfanova::dwt::{wavelet_filters, BasisName};

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All complex roots of a polynomial with coefficients in ascending order,
/// by Durand-Kerner iteration.
fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |z: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
    let seed = Complex64::new(0.4, 0.9);
    let mut r: Vec<Complex64> = (0..deg).map(|i| seed.powu(i as u32)).collect();
    for _ in 0..2000 {
        let prev = r.clone();
        for i in 0..deg {
            let denom = (0..deg)
                .filter(|&j| j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, j| acc * (r[i] - r[j]));
            let step = eval(r[i]) / denom;
            r[i] -= step;
        }
        if r.iter().zip(&prev).all(|(a, b)| (a - b).norm() < 1e-15) {
            break;
        }
    }
    r
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Minimum-phase Daubechies lowpass with `p` vanishing moments.
fn daubechies(p: usize) -> Vec<f64> {
    // P(y) = sum_k C(p-1+k, k) y^k with y = (2 - z - 1/z) / 4.
    let py: Vec<f64> = (0..p).map(|k| binomial((p - 1 + k) as u64, k as u64)).collect();
    let one = Complex64::new(1.0, 0.0);
    // Descending coefficients of prod (z + 1)^p prod (z - z_i).
    let mut poly = vec![one];
    for _ in 0..p {
        poly = poly_mul(&poly, &[one, one]);
    }
    if p > 1 {
        for y in roots(&py) {
            // z + 1/z = 2 - 4y; keep the root inside the unit circle.
            let b = Complex64::new(2.0, 0.0) - 4.0 * y;
            let disc = (b * b - 4.0).sqrt();
            let (z1, z2) = ((b + disc) / 2.0, (b - disc) / 2.0);
            let z = if z1.norm() < z2.norm() { z1 } else { z2 };
            poly = poly_mul(&poly, &[one, -z]);
        }
    }
    let h: Vec<f64> = poly.iter().map(|c| c.re).collect();
    let s: f64 = h.iter().sum();
    h.iter().map(|v| v * std::f64::consts::SQRT_2 / s).collect()
}

fn autocorrelation(h: &[f64]) -> Vec<f64> {
    (0..h.len())
        .map(|k| (0..h.len() - k).map(|i| h[i] * h[i + k]).sum())
        .collect()
}

#[test]
fn db3_and_db6_match_spectral_factorization() {
    for (basis, p) in [(BasisName::Db3, 3), (BasisName::Db6, 6)] {
        let oracle = daubechies(p);
        let shipped = wavelet_filters(basis).lowpass;
        assert_eq!(oracle.len(), shipped.len());
        for (a, b) in oracle.iter().zip(&shipped) {
            assert!((a - b).abs() < 1e-10, "{basis}: {a} vs {b}");
        }
    }
}

#[test]
fn sym8_has_the_db8_power_spectrum() {
    // Symlets share the squared modulus of the Daubechies filter and differ
    // only in the choice of roots, so the autocorrelations agree.
    let ours = autocorrelation(&wavelet_filters(BasisName::Sym8).lowpass);
    let oracle = autocorrelation(&daubechies(8));
    for (a, b) in ours.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn double_shift_orthonormality() {
    for basis in BasisName::ALL {
        let f = wavelet_filters(basis);
        let (h, g) = (&f.lowpass, &f.highpass);
        let l = h.len();
        for shift in (0..l).step_by(2) {
            let hh: f64 = (0..l - shift).map(|i| h[i] * h[i + shift]).sum();
            let gg: f64 = (0..l - shift).map(|i| g[i] * g[i + shift]).sum();
            let expected = if shift == 0 { 1.0 } else { 0.0 };
            assert!((hh - expected).abs() < 1e-12, "{basis} h shift {shift}");
            assert!((gg - expected).abs() < 1e-12, "{basis} g shift {shift}");
        }
        for shift in (0..l).step_by(2) {
            let hg: f64 = (0..l - shift).map(|i| h[i] * g[i + shift]).sum();
            let gh: f64 = (0..l - shift).map(|i| g[i] * h[i + shift]).sum();
            assert!(hg.abs() < 1e-12 && gh.abs() < 1e-12, "{basis} cross shift {shift}");
        }
    }
}

proptest! {
    /// Polynomials up to the vanishing-moment order are annihilated by the
    /// highpass filter.
    #[test]
    fn highpass_kills_low_order_polynomials(
        basis in prop::sample::select(BasisName::ALL.to_vec()),
        coeffs in prop::collection::vec(-2.0f64..2.0, 1..9),
        offset in -5.0f64..5.0,
    ) {
        let f = wavelet_filters(basis);
        let degree = (coeffs.len() - 1).min(basis.vanishing_moments() - 1);
        let poly = |x: f64| coeffs[..=degree].iter().rev().fold(0.0, |acc, c| acc * x + c);
        let out: f64 = f.highpass.iter().enumerate().map(|(k, g)| g * poly(k as f64 / 8.0 + offset)).sum();
        let scale: f64 = f.highpass.iter().enumerate().map(|(k, g)| (g * poly(k as f64 / 8.0 + offset)).abs()).sum();
        prop_assert!(out.abs() <= 1e-10 * scale.max(1.0), "residual {out} at scale {scale}");
    }
}
