//! Iterative estimation of rho and f from one simulated series, with 50
//! random initial values.

use wfanova::car1::{derive_params, simulate_model};
use wfanova::cochrane_orcutt::{draw_initial_rhos, fit, FitConfig};
use wfanova::dwt::BasisName;
use wfanova::rng::{stream, START_LANE};
use wfanova::shrinkage::{RegimeKind, ShrinkageSpec};
use wfanova::simlab::{imse, make_test_function, scale_to_snr, TestFunctionName};

pub fn main() -> wfanova::Result<()> {
    let (n, rho, snr, seed) = (2048, 0.99, 3.0, 11);
    let params = derive_params(rho, 1.0, n)?;
    let f = scale_to_snr(&make_test_function(TestFunctionName::Doppler, n)?, params.sigma_p(), snr)?;
    let y = simulate_model(&f, &params, seed)?;

    let starts = draw_initial_rhos(50, &mut stream(seed, 0, START_LANE));
    let cfg = FitConfig::new(
        BasisName::Db6,
        ShrinkageSpec::for_length(RegimeKind::Term, n)?,
        ShrinkageSpec::for_length(RegimeKind::Block, n)?,
        starts,
    );
    let res = fit(&y, &cfg)?;
    let (lo, hi) = res
        .per_start_rhos
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(*r), b.max(*r)));
    println!("true rho {rho}, estimate {:.4} after {} iterations (converged: {})", res.rho_hat, res.iterations, res.converged);
    println!("spread of the 50 per-start estimates: [{lo:.6}, {hi:.6}]");
    println!("sigma_u: true {:.5}, estimate {:.5}", params.sigma_u2().sqrt(), res.sigma_u_hat);
    println!("IMSE of f_hat {:.4} (stationary noise variance {:.4})", imse(res.f_hat.samples(), f.samples())?, params.sigma_p2());
    Ok(())
}
