//! Forward and inverse periodized DWT with the three supported bases.

use wfanova::dwt::{forward_dwt, inverse_dwt, wavelet_filters, BasisName};
use wfanova::simlab::{make_test_function, TestFunctionName};

pub fn main() -> wfanova::Result<()> {
    let f = make_test_function(TestFunctionName::HeaviSine, 1024)?;
    for basis in BasisName::ALL {
        let filters = wavelet_filters(basis);
        let c = forward_dwt(&f, basis, 3)?;
        let back = inverse_dwt(&c, basis)?;
        let err = back
            .samples()
            .iter()
            .zip(f.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        // Energy is preserved by an orthogonal transform.
        let energy: f64 = f.samples().iter().map(|v| v * v).sum();
        println!(
            "{basis:>5}: {} taps, {} vanishing moments, energy ratio {:.12}, max round-trip error {err:.2e}",
            filters.lowpass.len(),
            basis.vanishing_moments(),
            c.energy() / energy,
        );
        for (j, d) in c.detail_levels().filter(|(j, _)| *j >= 7) {
            let e: f64 = d.iter().map(|v| v * v).sum();
            println!("       level {j}: {} coefficients, energy {e:.4}", d.len());
        }
    }
    Ok(())
}
