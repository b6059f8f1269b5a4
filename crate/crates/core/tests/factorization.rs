use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use salsa_core::channel::ChannelProfile;
use salsa_core::experiment::{enumerate_divisions, factorize_matrix, matrix_from_csv, matrix_to_csv};
use salsa_core::kron::{rearrange, FactorShape};
use salsa_core::linalg::{complex_gaussian, numerical_rank, CMatrix};

#[test]
fn identity_factorizes_at_rearrangement_rank() {
    let shape = FactorShape::new(8, 8, 8, 8).unwrap();
    let x = CMatrix::identity(64, 64);
    let rank = numerical_rank(&rearrange(&x, shape).unwrap()).unwrap();
    let rows = factorize_matrix(&x, shape, rank).unwrap();
    assert!(rows[rank - 1].relative_mse <= 1e-20, "{:?}", rows[rank - 1]);
    if rank > 1 {
        assert!(rows[rank - 2].relative_mse > 1e-6);
    }
}

#[test]
fn generated_channel_reaches_floor_by_eight_terms() {
    let h = ChannelProfile::default_profile().generate(16, 7).unwrap().total;
    let shape = FactorShape::new(8, 8, 64, 1).unwrap();
    let rows = factorize_matrix(&h, shape, 8).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].mse <= w[0].mse * (1.0 + 1e-12) + 1e-20);
    }
    assert!(rows[7].relative_mse <= 1e-10);
}

#[test]
fn every_small_scenario_reaches_full_rank_floor() {
    let h = ChannelProfile::default_profile().generate(16, 8).unwrap().total;
    for shape in enumerate_divisions(64, 64) {
        let full = shape.full_rank();
        if full > 16 {
            continue;
        }
        let rows = factorize_matrix(&h, shape, full).unwrap();
        assert!(rows[full - 1].relative_mse <= 1e-10, "{shape}: {:?}", rows[full - 1]);
    }
}

#[test]
fn csv_input_matches_in_memory_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = complex_gaussian(&mut rng, 6, 4, 1.0);
    let shape = FactorShape::new(3, 2, 2, 2).unwrap();
    let parsed = matrix_from_csv(&matrix_to_csv(&x), 6, 4).unwrap();
    assert_eq!(factorize_matrix(&parsed, shape, 4).unwrap(), factorize_matrix(&x, shape, 4).unwrap());
    assert!(matrix_from_csv(&matrix_to_csv(&x), 5, 4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn full_rank_reconstruction_for_any_input(
        i1 in 1usize..4, i2 in 1usize..4, j1 in 1usize..4, j2 in 1usize..4, seed in any::<u64>()
    ) {
        let shape = FactorShape::new(i1, i2, j1, j2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = complex_gaussian(&mut rng, shape.rows(), shape.cols(), 1.0);
        let rows = factorize_matrix(&x, shape, shape.full_rank()).unwrap();
        prop_assert!(rows.last().unwrap().relative_mse <= 1e-10);
        for w in rows.windows(2) {
            prop_assert!(w[1].mse <= w[0].mse * (1.0 + 1e-12) + 1e-20);
        }
    }
}
