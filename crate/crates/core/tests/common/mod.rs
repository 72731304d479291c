#![allow(dead_code)]

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::Rng;
use rug::Rational;
use wshift_core::multiindex::enumerate_leq_degree;
use wshift_core::weights::RadialSequence;
use wshift_core::WeightFunction;

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::from((p, q))
}

/// Table weight over `|α| <= max_degree` with a random subset of entries
/// overridden by random positive rationals.
pub fn random_table<R: Rng>(rng: &mut R, m: usize, max_degree: u32, fallback_n: u32) -> WeightFunction {
    let mut entries = BTreeMap::new();
    for alpha in enumerate_leq_degree(m, max_degree) {
        if rng.random_bool(0.5) {
            let p: i64 = rng.random_range(1..=30);
            let q: i64 = rng.random_range(1..=30);
            entries.insert(alpha, rat(p, q));
        }
    }
    WeightFunction::table(m, entries, RadialSequence::Power(fallback_n)).unwrap()
}

pub fn arb_rational() -> impl Strategy<Value = Rational> {
    (1i64..=40, 1i64..=40).prop_map(|(p, q)| rat(p, q))
}

pub fn arb_radial_sequence() -> impl Strategy<Value = RadialSequence> {
    prop_oneof![
        (1u32..=5).prop_map(RadialSequence::Power),
        arb_rational().prop_map(RadialSequence::Geometric),
        prop::collection::vec(arb_rational(), 1..4).prop_map(RadialSequence::Polynomial),
        prop::collection::vec(arb_rational(), 40..41).prop_map(RadialSequence::List),
    ]
}

pub fn arb_radial_weight(m: usize) -> impl Strategy<Value = WeightFunction> {
    arb_radial_sequence().prop_map(move |a| WeightFunction::radial(m, a).unwrap())
}

/// Radial, table or ray-perturbed weights in dimension `m`.
pub fn arb_weight(m: usize) -> impl Strategy<Value = WeightFunction> {
    let table = (
        prop::collection::vec((prop::collection::vec(0u32..5, m), arb_rational()), 0..12),
        1u32..=3,
    )
        .prop_map(move |(raw, n)| {
            let entries: BTreeMap<_, _> = raw
                .into_iter()
                .map(|(a, v)| (wshift_core::MultiIndex::new(a), v))
                .collect();
            WeightFunction::table(m, entries, RadialSequence::Power(n)).unwrap()
        });
    let mut options = vec![arb_radial_weight(m).boxed(), table.boxed()];
    if m >= 2 {
        options.push(
            (2u32..=3)
                .prop_map(move |n| WeightFunction::ray_perturbed(n, m, 2).unwrap())
                .boxed(),
        );
    }
    proptest::strategy::Union::new(options)
}
