mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Rational;
use wshift_core::hypercontraction::defect_diag;
use wshift_core::multiindex::enumerate_leq_degree;
use wshift_core::truncation::build_truncated;

#[test]
fn truncated_defects_equal_formula_defects() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..25 {
        let m = rng.random_range(1..=2usize);
        let d = rng.random_range(0..=8u32);
        let fallback = rng.random_range(1..=3);
        let w = random_table(&mut rng, m, d, fallback);
        let tt = build_truncated(&w, d).unwrap();
        assert!(tt.commutator_defects().iter().all(|c| c.2 == 0));
        for k in 1..=4u64 {
            let diag = tt.defect_operator(k).unwrap();
            for (alpha, v) in tt.basis().iter().zip(&diag) {
                assert_eq!(*v, defect_diag(&w, k, alpha).unwrap());
            }
        }
        let m1 = tt.m_power_diag(1).unwrap();
        for (alpha, v) in tt.basis().iter().zip(&m1) {
            assert_eq!(*v, Rational::from(1) - defect_diag(&w, 1, alpha).unwrap());
        }
    }
}

#[test]
fn gram_products_are_diagonal_and_float_paths_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..5 {
        let w = random_table(&mut rng, 2, 6, 2);
        let tt = build_truncated(&w, 6).unwrap();
        for beta in enumerate_leq_degree(2, 4) {
            tt.gram_diagonal(&beta).unwrap();
        }
        assert!(tt.float_cross_check(3).unwrap() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decay_curves_vanish_exactly_past_the_degree(w in arb_weight(2), a in prop::collection::vec(0u32..4, 2)) {
        let tt = build_truncated(&w, 6).unwrap();
        let alpha = wshift_core::MultiIndex::new(a);
        let d = alpha.degree();
        let curve = tt.decay_curve(&alpha, d + 2).unwrap();
        prop_assert_eq!(&curve[0], &Rational::from(1));
        for v in &curve[..=d as usize] {
            prop_assert!(*v > 0);
        }
        prop_assert_eq!(&curve[d as usize + 1], &Rational::new());
        prop_assert_eq!(&curve[d as usize + 2], &Rational::new());
    }
}
