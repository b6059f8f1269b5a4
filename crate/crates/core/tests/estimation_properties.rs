use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use salsa_core::estimators::{ls_estimate, nmse, salsa_estimate_matrix, SalsaConfig};
use salsa_core::kron::FactorShape;
use salsa_core::linalg::complex_gaussian;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ls_is_exact_without_noise(n_bs in 1usize..8, extra in 0usize..5, j in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = complex_gaussian(&mut rng, n_bs + extra, n_bs, 1.0);
        let h = complex_gaussian(&mut rng, n_bs, j, 1.0);
        prop_assert!(nmse(&h, &ls_estimate(&(&a * &h), &a).unwrap()).unwrap() <= 1e-10);
    }

    #[test]
    fn adding_terms_never_worsens_fit(seed in any::<u64>(), noise in 0.0f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = FactorShape::new(2, 3, 2, 3).unwrap();
        let a = complex_gaussian(&mut rng, 5, 6, 1.0);
        let h = complex_gaussian(&mut rng, 6, 6, 1.0);
        let y = &a * &h + complex_gaussian(&mut rng, 5, 6, noise);
        let report = salsa_estimate_matrix(&y, &a, &SalsaConfig::new(shape, 4).with_seed(seed)).unwrap();
        for r in 1..4 {
            prop_assert!(report.fit_residuals[r] <= report.fit_residuals[0] + 1e-9);
        }
        for t in &report.trajectories {
            for w in t.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-12);
            }
        }
    }

    #[test]
    fn unstructured_shape_matches_least_squares(n_bs in 1usize..7, extra in 0usize..3, j in 1usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = complex_gaussian(&mut rng, n_bs + extra, n_bs, 1.0);
        let h = complex_gaussian(&mut rng, n_bs, j, 1.0);
        let shape = FactorShape::new(n_bs, 1, j, 1).unwrap();
        let report = salsa_estimate_matrix(&(&a * &h), &a, &SalsaConfig::new(shape, 1)).unwrap();
        prop_assert!(nmse(&h, &report.estimate).unwrap() <= 1e-8);
    }

    #[test]
    fn identical_seeds_give_identical_reports(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = FactorShape::new(2, 2, 3, 2).unwrap();
        let a = complex_gaussian(&mut rng, 4, 4, 1.0);
        let y = complex_gaussian(&mut rng, 4, 6, 1.0);
        let cfg = SalsaConfig::new(shape, 3).with_seed(seed);
        let first = salsa_estimate_matrix(&y, &a, &cfg).unwrap();
        let second = salsa_estimate_matrix(&y, &a, &cfg).unwrap();
        prop_assert!(first.same_numbers(&second));
    }
}
