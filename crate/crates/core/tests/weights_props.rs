mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rug::{Float, Integer, Rational};
use wshift_core::multiindex::{binomial, enumerate_leq_degree};
use wshift_core::weights::{eval_metric, RadialSequence, WeightSpec};
use wshift_core::{MultiIndex, WeightFunction};

#[test]
fn power_kernel_is_radial_with_binomial_coefficients() {
    for n in 1..=5u32 {
        for m in 1..=3usize {
            let w = WeightFunction::power(m, n).unwrap();
            for alpha in enumerate_leq_degree(m, 15) {
                let d = alpha.degree();
                // (n+|α|-1)! / (α! (n-1)!)
                let direct = Rational::from((
                    Integer::from(Integer::factorial(n + d as u32 - 1)),
                    alpha.factorial() * Integer::from(Integer::factorial(n - 1)),
                ));
                let radial = Rational::from(binomial((n as u64 + d - 1) as i64, d))
                    * Rational::from((
                        Integer::from(Integer::factorial(d as u32)),
                        alpha.factorial(),
                    ));
                assert_eq!(w.rho(&alpha).unwrap(), direct);
                assert_eq!(direct, radial);
            }
        }
    }
}

#[test]
fn worked_weight_values() {
    assert_eq!(WeightFunction::power(3, 4).unwrap().rho(&MultiIndex::zero(3)).unwrap(), 1);
    assert_eq!(WeightFunction::power(2, 2).unwrap().rho(&MultiIndex::from([1, 0])).unwrap(), 2);
    assert_eq!(WeightFunction::power(2, 1).unwrap().rho(&MultiIndex::from([1, 1])).unwrap(), 2);
    let da = WeightFunction::power(2, 1).unwrap();
    assert_eq!(da.shift_weight_sq(&MultiIndex::from([1, 0]), 1).unwrap(), rat(1, 2));
    let hardy = WeightFunction::power(1, 1).unwrap();
    for j in 0..20 {
        assert_eq!(hardy.shift_weight_sq(&MultiIndex::from([j]), 0).unwrap(), 1);
    }
}

#[test]
fn perturbed_bases_and_profile() {
    let w = WeightFunction::ray_perturbed(2, 2, 3).unwrap();
    let p = match w.kind() {
        wshift_core::weights::WeightKind::RayPerturbed(p) => p.clone(),
        _ => unreachable!(),
    };
    assert_eq!(p.bases, vec![63, 511, 4095]);
    for l in 1..=3u32 {
        let b = p.base_point(2, l);
        // divisor 1 at k=1 leaves the weight unchanged
        let power = WeightFunction::power(2, 2).unwrap();
        let first = b.shifted(0, 1);
        assert_eq!(w.rho(&first).unwrap(), power.rho(&first).unwrap());
        for k in 1..2 * l {
            let a = b.shifted(0, k);
            let mirror = b.shifted(0, 2 * l - k);
            assert_eq!(p.divisor(&a), p.divisor(&mirror));
            assert_eq!(p.divisor(&a), k.min(2 * l - k));
        }
        assert_eq!(p.divisor(&b), 1);
        assert_eq!(p.divisor(&b.shifted(0, 2 * l)), 1);
    }
}

#[test]
fn specs_round_trip_through_json() {
    let w = WeightFunction::ray_perturbed(2, 2, 2).unwrap();
    let spec = WeightSpec::try_from(&w).unwrap();
    let text = serde_json::to_string(&spec).unwrap();
    assert_eq!(text, r#"{"kind":"perturbed45","n":2,"m":2,"L":2}"#);
    assert_eq!(WeightSpec::from_json(&text).unwrap().build().unwrap(), w);
}

#[test]
fn explicit_lists_fail_past_their_end() {
    let w = WeightFunction::radial(2, RadialSequence::List(vec![rat(1, 1), rat(2, 1), rat(9, 2)])).unwrap();
    assert_eq!(w.rho(&MultiIndex::from([1, 1])).unwrap(), 9);
    assert!(w.rho(&MultiIndex::from([2, 1])).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_weights_telescope(
        w in arb_weight(2),
        a in prop::collection::vec(0u32..6, 2),
        i in 0usize..2,
        l in 0u32..=10,
    ) {
        let alpha = MultiIndex::new(a);
        let mut product = Rational::from(1);
        for k in 0..=l {
            product *= w.shift_weight_sq(&alpha.shifted(i, k), i).unwrap();
        }
        let end = alpha.shifted(i, l + 1);
        prop_assert_eq!(&product, &(w.rho(&alpha).unwrap() / w.rho(&end).unwrap()));
        prop_assert_eq!(product, w.rho_ratio(&alpha, &end).unwrap());
    }

    #[test]
    fn metric_at_origin_is_rho_theta(w in arb_weight(2), c in arb_rational()) {
        let w = w.scaled(c).unwrap();
        let v = eval_metric(&w, &[Complex64::new(0.0, 0.0); 2], 30, 80).unwrap();
        prop_assert_eq!(v.value, Float::with_val(80, &w.rho(&MultiIndex::zero(2)).unwrap()));
    }

    #[test]
    fn rho_is_positive(w in arb_weight(3), a in prop::collection::vec(0u32..8, 3)) {
        prop_assert!(w.rho(&MultiIndex::new(a)).unwrap() > 0);
    }
}

#[test]
fn metric_matches_brute_force_sum() {
    // independent multi-index summation of Σ ρ(α)|w^α|²
    let w = WeightFunction::ray_perturbed(2, 2, 2).unwrap().scaled(rat(3, 2)).unwrap();
    let p = [Complex64::new(0.3, -0.2), Complex64::new(0.1, 0.4)];
    let x = [p[0].norm_sqr(), p[1].norm_sqr()];
    let mut brute = 0.0;
    for alpha in enumerate_leq_degree(2, 60) {
        let e = alpha.entries();
        brute += w.rho(&alpha).unwrap().to_f64() * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32);
    }
    let v = eval_metric(&w, &p, 60, 100).unwrap();
    assert!((v.value.to_f64() - brute).abs() < 1e-12 * brute);
    let full = eval_metric(&w, &p, 400, 100).unwrap();
    assert!((full.value.to_f64() - v.value.to_f64()).abs() <= v.tail_bound.to_f64());
}
