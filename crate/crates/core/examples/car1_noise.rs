//! Parameter algebra and exact simulation of the sampled CAR(1) process.

use wfanova::car1::{derive_params, estimate_rho_lag1, fisher_information, simulate_car1};

pub fn main() -> wfanova::Result<()> {
    let n = 4096;
    for rho in [0.99, 0.999, 0.9999] {
        let p = derive_params(rho, 1.0, n)?;
        let e = simulate_car1(&p, n, 42)?;
        let rho_hat = estimate_rho_lag1(e.samples())?;
        println!(
            "rho {rho}: alpha {:.4}, sigma_p {:.4}, sigma_u {:.5}, sample sd {:.4}, lag-1 estimate {rho_hat:.5}",
            p.alpha(),
            p.sigma_p(),
            p.sigma_u2().sqrt(),
            e.sd(),
        );
    }
    let p = derive_params(0.99, 1.0, n)?;
    let info = fisher_information(p.rho(), p.sigma_u2(), n)?;
    println!("Fisher information at rho = 0.99 (mean, rho, sigma_u^2):");
    for row in info {
        println!("  [{:>12.4e} {:>12.4e} {:>12.4e}]", row[0], row[1], row[2]);
    }
    Ok(())
}
