use proptest::prelude::*;
use rand::Rng;
use wfanova::car1::{
    alpha_from_rho, derive_params, estimate_rho_lag1, estimate_rho_residuals, fisher_information,
    simulate_car1,
};
use wfanova::cochrane_orcutt::prewhiten;
use wfanova::rng::stream;

fn lag1_autocorrelation(x: &[f64]) -> f64 {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    let num: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    let den: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    num / den
}

#[test]
fn stationary_variance_and_lag_one() {
    let n = 1 << 16;
    // sigma_p^2 = 1 needs sigma^2 = 2 alpha.
    let alpha = alpha_from_rho(0.9, n).unwrap();
    let p = derive_params(0.9, 2.0 * alpha, n).unwrap();
    assert!((p.sigma_p2() - 1.0).abs() < 1e-12);
    let e = simulate_car1(&p, n, 2024).unwrap();
    let var = e.sd().powi(2);
    assert!((0.9..=1.1).contains(&(var / p.sigma_p2())), "variance ratio {}", var / p.sigma_p2());
    let r = lag1_autocorrelation(e.samples());
    assert!((0.88..=0.92).contains(&r), "lag-1 {r}");
}

#[test]
fn residual_rule_on_exact_paths() {
    let n = 1 << 15;
    let p = derive_params(0.99, 1.0, n).unwrap();
    let e = simulate_car1(&p, n, 7).unwrap();
    assert!((estimate_rho_residuals(e.samples()) - 0.99).abs() < 0.005);
    assert!((estimate_rho_lag1(e.samples()).unwrap() - 0.99).abs() < 0.005);
    let mut rng = stream(8, 0, 0);
    let white: Vec<f64> = (0..n).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
    assert!(estimate_rho_residuals(&white).abs() < 0.02);
}

#[test]
fn whitening_with_true_rho() {
    for (rho, seed) in [(0.5, 1), (0.9, 2), (0.99, 3), (0.9999, 4)] {
        let n = 1 << 14;
        let p = derive_params(rho, 1.0, n).unwrap();
        let e = simulate_car1(&p, n, seed).unwrap();
        let z = prewhiten(&e, rho).unwrap();
        let r = lag1_autocorrelation(&z.samples()[1..]);
        assert!(r.abs() < 3.0 / (n as f64).sqrt(), "rho {rho}: residual lag-1 {r}");
    }
}

/// Positive definiteness through the leading principal minors.
fn is_positive_definite(m: &[[f64; 3]; 3]) -> bool {
    let schur = m[2][2] - m[1][2] * m[2][1] / m[1][1];
    m[0][0] > 0.0 && m[1][1] > 0.0 && schur > 0.0
}

#[test]
fn fisher_matrix_spec_examples() {
    let m = fisher_information(0.0, 1.0, 10).unwrap();
    assert_eq!(m[0][0], 10.0);
    assert_eq!(m[1][1], 9.0);
    assert_eq!(m[1][2], 1.0);
    assert_eq!(m[2][2], 5.0);
    assert!(is_positive_definite(&fisher_information(0.5, 2.0, 100).unwrap()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn fisher_matrix_symmetric_positive_definite(
        rho in -0.999_999f64..0.999_999,
        log_s in -8.0f64..4.0,
        n in 3usize..100_000,
    ) {
        let m = fisher_information(rho, 10f64.powf(log_s), n).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(m[i][j], m[j][i]);
            }
        }
        prop_assert_eq!(m[0][1], 0.0);
        prop_assert_eq!(m[0][2], 0.0);
        prop_assert!(is_positive_definite(&m));
    }
}
