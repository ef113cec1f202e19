use hetcause::causality::bootstrap_replicate;
use hetcause::weights::cross_scores;
use hetcause::{
    omega_varhac, omega_w, run_tests, wald_test, wild_bootstrap_test, BootstrapOptions, Execution,
    LagSelection, Method, WaldWeight,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn heteroscedastic_noise(t_len: usize, d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(t_len, d, |t, j| {
        let z: f64 = StandardNormal.sample(&mut rng);
        let r = (t + 1) as f64 / t_len as f64;
        z * (1.0 + (j as f64 + 1.0) * r)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wald_statistics_are_scale_free(seed in any::<u64>(), log_kappa in -3.0f64..3.0, d1 in 1usize..3) {
        let r = heteroscedastic_noise(120, 3, seed);
        let kappa = 10f64.powf(log_kappa);
        for weight in [WaldWeight::St, WaldWeight::W, WaldWeight::H(LagSelection::Fixed(1))] {
            let a = wald_test(&r, d1, weight).unwrap().statistic;
            let b = wald_test(&(&r * kappa), d1, weight).unwrap().statistic;
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
    }

    #[test]
    fn bootstrap_p_value_is_scale_free(seed in any::<u64>(), log_kappa in -3.0f64..3.0) {
        let r = heteroscedastic_noise(80, 2, seed);
        let opts = BootstrapOptions::new(49, seed);
        let a = wild_bootstrap_test(&r, 1, &opts).unwrap();
        let b = wild_bootstrap_test(&(&r * 10f64.powf(log_kappa)), 1, &opts).unwrap();
        prop_assert_eq!(a.p_value, b.p_value);
    }

    #[test]
    fn wald_p_values_agree_with_reference_chi_square(seed in any::<u64>()) {
        let r = heteroscedastic_noise(60, 4, seed);
        let res = wald_test(&r, 2, WaldWeight::W).unwrap();
        let reference = 1.0 - ChiSquared::new(4.0).unwrap().cdf(res.statistic);
        prop_assert!((res.p_value - reference).abs() < 1e-10);
    }
}

#[test]
fn bootstrap_endpoint_moments_match_white_weight() {
    let r = heteroscedastic_noise(300, 2, 17);
    let scores = cross_scores(&r, 1).unwrap();
    let b = 20_000;
    let ends: Vec<DVector<f64>> =
        Execution::Auto.map_indexed(b, |i| bootstrap_replicate(&scores, 3, i as u64).endpoint);
    let mean: f64 = ends.iter().map(|e| e[0]).sum::<f64>() / b as f64;
    let var: f64 = ends.iter().map(|e| e[0] * e[0]).sum::<f64>() / b as f64;
    assert!(mean.abs() <= 4.0 * var.sqrt() / (b as f64).sqrt());
    let w = omega_w(&r, 1).unwrap()[(0, 0)];
    assert!(((var - w) / w).abs() <= 0.05, "{var} vs {w}");
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let r = heteroscedastic_noise(200, 2, 5);
    let seq = BootstrapOptions::new(199, 9).with_execution(Execution::Sequential);
    let par =
        BootstrapOptions::new(199, 9).with_execution(Execution::Parallel { threads: Some(3) });
    let a = run_tests(&r, 1, &Method::ALL, LagSelection::default(), &seq).unwrap();
    let b = run_tests(&r, 1, &Method::ALL, LagSelection::default(), &par).unwrap();
    assert_eq!(a, b);
}

#[test]
fn varhac_on_white_noise_is_close_to_white_weight() {
    let r = heteroscedastic_noise(5000, 2, 21);
    let est = omega_varhac(&r, 1, LagSelection::Fixed(1)).unwrap();
    assert!(est.coefficients[0].amax() < 0.05);
    let w = omega_w(&r, 1).unwrap();
    assert!((&est.omega - &w).norm() / w.norm() < 0.05);
}
