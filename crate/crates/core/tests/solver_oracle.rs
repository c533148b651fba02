//! The exact solver agrees with exhaustive enumeration on small trees.

use mted_core::distance::{edit_distance, edit_distance_oracle, SolverConfig};
use mted_core::edit::{is_m2, mapping_cost};
use mted_core::random;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn solver_matches_oracle_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = SolverConfig::default();
    for _ in 0..300 {
        let (n, m) = (rng.gen_range(0..=5), rng.gen_range(0..=5));
        let t = random::weighted_tree(&mut rng, n, 0.1, 2.0);
        let g = random::weighted_tree(&mut rng, m, 0.1, 2.0);
        let exact = edit_distance_oracle(&t, &g, 6).unwrap();
        let fast = edit_distance(&t, &g, &cfg).unwrap();
        assert!((exact.value - fast.value).abs() <= 1e-9, "{} vs {} on {t:?} / {g:?}", exact.value, fast.value);
        assert!((mapping_cost(&t, &g, &fast.mapping).unwrap() - fast.value).abs() <= 1e-9);
        assert!(is_m2(&t, &g, &fast.mapping));
    }
}

#[test]
fn oracle_rejects_large_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = random::weighted_tree(&mut rng, 7, 0.1, 2.0);
    assert!(edit_distance_oracle(&t, &t, 6).is_err());
}
