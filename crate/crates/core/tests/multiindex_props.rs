mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use rug::ops::Pow;
use rug::Integer;
use wshift_core::multiindex::{
    binomial, enumerate_degree, enumerate_leq_degree, multinomial, sub_indices,
    verify_alternating_sum, verify_convolution_identities, verify_vandermonde,
};
use wshift_core::MultiIndex;

#[test]
fn enumeration_count_uniqueness_and_downward_closure() {
    for m in 1..=4usize {
        for d in 0..=7u32 {
            let all = enumerate_leq_degree(m, d);
            assert_eq!(Integer::from(all.len()), binomial((d as usize + m) as i64, m as u64));
            let set: HashSet<_> = all.iter().cloned().collect();
            assert_eq!(set.len(), all.len());
            for a in &all {
                for i in 0..m {
                    if let Some(lower) = a.lowered(i) {
                        assert!(set.contains(&lower));
                    }
                }
            }
            assert!(all.windows(2).all(|w| w[0] < w[1]));
        }
    }
    assert_eq!(
        enumerate_leq_degree(2, 1),
        vec![MultiIndex::from([0, 0]), MultiIndex::from([1, 0]), MultiIndex::from([0, 1])]
    );
    assert_eq!(enumerate_leq_degree(1, 5).len(), 6);
    assert_eq!(enumerate_leq_degree(3, 2).len(), 10);
}

#[test]
fn multinomial_theorem_at_one() {
    for m in 1..=4usize {
        for k in 0..=10u32 {
            let sum: Integer = enumerate_degree(m, k)
                .iter()
                .map(|a| multinomial(u64::from(k), a).unwrap())
                .sum();
            assert_eq!(sum, Integer::from(m).pow(k));
        }
    }
}

/// `β!/(α!(β-α)!)` as a product of one-variable binomials.
fn product_of_binomials(beta: &MultiIndex, alpha: &MultiIndex) -> Integer {
    beta.entries()
        .iter()
        .zip(alpha.entries())
        .map(|(&b, &a)| binomial(i64::from(b), u64::from(a)))
        .product()
}

#[test]
fn vandermonde_for_all_small_indices() {
    for m in 1..=4usize {
        for beta in enumerate_leq_degree(m, 8) {
            for i in 0..=beta.degree() {
                assert!(verify_vandermonde(&beta, i).unwrap(), "{beta} {i}");
                let oracle: Integer = sub_indices(&beta, i)
                    .iter()
                    .filter(|a| a.degree() == i)
                    .map(|a| product_of_binomials(&beta, a))
                    .sum();
                assert_eq!(oracle, binomial(beta.degree() as i64, i));
            }
            assert!(verify_vandermonde(&beta, beta.degree() + 1).is_err());
        }
    }
}

#[test]
fn convolution_identities_hold() {
    for n in 2..=8u64 {
        for j in 2..=3 * n {
            assert!(verify_convolution_identities(n, j).unwrap(), "n={n} j={j}");
        }
    }
    assert!(verify_convolution_identities(3, 1).is_err());
}

#[test]
fn alternating_sums_hold() {
    for n in 0..=10u64 {
        for top in 0..=n {
            assert!(verify_alternating_sum(n, top), "n={n} M={top}");
        }
    }
}

proptest! {
    #[test]
    fn graded_order_is_total_and_consistent(a in prop::collection::vec(0u32..6, 3), b in prop::collection::vec(0u32..6, 3)) {
        let (x, y) = (MultiIndex::new(a), MultiIndex::new(b));
        if x.degree() != y.degree() {
            prop_assert_eq!(x < y, x.degree() < y.degree());
        }
        if x.leq(&y).unwrap() && x != y {
            prop_assert!(x < y);
        }
    }

    #[test]
    fn sub_indices_are_exactly_the_lower_set(a in prop::collection::vec(0u32..5, 1..4), cap in 0u64..12) {
        let alpha = MultiIndex::new(a);
        let subs = sub_indices(&alpha, cap);
        let brute: Vec<MultiIndex> = enumerate_leq_degree(alpha.dim(), cap.min(alpha.degree()) as u32)
            .into_iter()
            .filter(|b| b.leq(&alpha).unwrap())
            .collect();
        prop_assert_eq!(subs, brute);
    }
}
