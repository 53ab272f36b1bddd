use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};
use wfanova::dwt::WaveletCoefficients;
use wfanova::fanova::{
    adaptive_test, adaptive_threshold, compute_components, decompose, default_lambdas,
    test_constant_difference, CurveSet, FanovaDecomposition, TestBranch, TestConfig,
};
use wfanova::rng::stream;
use wfanova::Signal;

fn curves() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..6, 3u32..8).prop_flat_map(|(r, k)| {
        prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 1usize << k), r)
    })
}

fn check_constraints(d: &FanovaDecomposition) -> Result<(), TestCaseError> {
    let n = d.n() as f64;
    prop_assert!((d.mu.iter().sum::<f64>() / n).abs() < 1e-10);
    prop_assert!(d.a.iter().sum::<f64>().abs() < 1e-10);
    for t in 0..d.n() {
        prop_assert!(d.gamma.iter().map(|g| g[t]).sum::<f64>().abs() < 1e-10);
    }
    for g in &d.gamma {
        prop_assert!((g.iter().sum::<f64>() / n).abs() < 1e-10);
    }
    Ok(())
}

proptest! {
    #[test]
    fn decomposition_identities(rows in curves()) {
        let d = decompose(&CurveSet::new(rows.clone()).unwrap()).unwrap();
        check_constraints(&d)?;
        for (orig, rec) in rows.iter().zip(d.reconstruct()) {
            for (a, b) in orig.iter().zip(&rec) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn decomposition_is_idempotent(rows in curves()) {
        let d = decompose(&CurveSet::new(rows).unwrap()).unwrap();
        let again = decompose(&CurveSet::new(d.reconstruct()).unwrap()).unwrap();
        prop_assert!((d.m0 - again.m0).abs() < 1e-10);
        for (a, b) in d.mu.iter().zip(&again.mu) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in d.a.iter().zip(&again.a) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        for (ga, gb) in d.gamma.iter().zip(&again.gamma) {
            for (a, b) in ga.iter().zip(gb) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }

    /// The adaptive decision equals an exhaustive search over split levels.
    #[test]
    fn adaptive_matches_brute_force(
        seed in any::<u64>(),
        big_j in 5usize..9,
        spike in prop::option::of((0usize..100, 0.0f64..2.0)),
        general in any::<bool>(),
    ) {
        let eta = 0.02;
        let mut rng = stream(seed, 0, 0);
        let mut c = WaveletCoefficients::zeros(3, big_j).unwrap();
        for j in 3..big_j {
            for v in c.detail_mut(j) {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v = eta * z;
            }
        }
        if let Some((pos, size)) = spike {
            let j = 3 + pos % (big_j - 3);
            let k = pos % (1 << j);
            c.detail_mut(j)[k] += size;
        }
        let branch = if general { TestBranch::AdaptiveGeneral } else { TestBranch::AdaptivePGe2 };
        let out = adaptive_test(&c, &TestConfig::new(branch).with_eta(eta)).unwrap();

        let lambdas = default_lambdas(big_j);
        let mut best = (f64::NEG_INFINITY, 0);
        for j in 3..big_j {
            let comp = compute_components(&c, eta, 3, j, &lambdas).unwrap();
            let (num, var) = if general {
                (comp.t + comp.q - comp.q_null, comp.v0 * comp.v0 + comp.w0 * comp.w0)
            } else {
                (comp.t, comp.v0 * comp.v0)
            };
            if var > 0.0 && num / var.sqrt() > best.0 {
                best = (num / var.sqrt(), j);
            }
        }
        prop_assert!((out.statistic - best.0).abs() < 1e-12);
        prop_assert_eq!(out.j_used, best.1);
        prop_assert_eq!(out.reject, best.0 > adaptive_threshold(eta).unwrap());
    }
}

#[test]
fn random_three_by_sixty_four() {
    let mut rng = stream(64, 0, 0);
    let rows: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..64).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let d = decompose(&CurveSet::new(rows).unwrap()).unwrap();
    check_constraints(&d).unwrap();
}

#[test]
fn bump_on_difference_is_detected() {
    let n = 1024;
    let sigma = 1.0;
    let eta = sigma / (n as f64).sqrt();
    let g = Signal::new((0..n).map(|t| (t as f64 / 90.0).cos()).collect()).unwrap();
    let reps = 200;
    for branch in [TestBranch::PGe2, TestBranch::PIn12, TestBranch::AdaptiveGeneral, TestBranch::AdaptivePGe2] {
        let cfg = TestConfig::new(branch).with_eta(eta);
        let mut rejections = 0;
        for r in 0..reps {
            let mut rng = stream(31, r, 0);
            let z: Vec<f64> = (0..n)
                .map(|t| {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    let bump = if (500..532).contains(&t) { 10.0 * sigma } else { 0.0 };
                    g.samples()[t] + 7.0 + bump + sigma * noise
                })
                .collect();
            if test_constant_difference(&Signal::new(z).unwrap(), &g, &cfg).unwrap().reject {
                rejections += 1;
            }
        }
        let power = rejections as f64 / reps as f64;
        assert!(power > 0.9, "{branch}: power {power}");
    }
}

#[test]
fn exact_constant_shift_never_rejects() {
    let g = Signal::new((0..512).map(|t| ((t * 7) % 13) as f64).collect()).unwrap();
    let z = Signal::new(g.samples().iter().map(|v| v + 5.0).collect()).unwrap();
    for branch in [TestBranch::PGe2, TestBranch::PIn12, TestBranch::AdaptiveGeneral, TestBranch::AdaptivePGe2] {
        let out = test_constant_difference(&z, &g, &TestConfig::new(branch).with_eta(0.01)).unwrap();
        assert!(!out.reject, "{branch}");
    }
}
