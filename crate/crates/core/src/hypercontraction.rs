//! Exact defect diagonals `d_k(α) = ⟨Δ^(k) e_α, e_α⟩` and the hypercontraction
//! tests built on them.
//!
//! For a weighted shift tuple
//! `d_k(α) = Σ_{β ≤ α, |β| ≤ k} (-1)^{|β|} k!/(β!(k-|β|)!) ρ(α-β)/ρ(α)`.
//! Everything here is exact; no comparison uses a tolerance.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rug::Rational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multiindex::{binomial, enumerate_leq_degree, multinomial, sub_indices, MultiIndex};
use crate::report::rational_str;
use crate::weights::{RadialSequence, WeightFunction};

/// Spread of `a(k)/k^{n-1}` beyond which growth is reported as divergent.
pub const GROWTH_DIVERGENCE_RATIO: f64 = 1e6;

pub fn defect_diag(w: &WeightFunction, k: u64, alpha: &MultiIndex) -> Result<Rational> {
    if k == 0 {
        return Err(Error::InvalidArgument("defect order must be at least 1".into()));
    }
    if alpha.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            found: alpha.dim(),
        });
    }
    let mut sum = Rational::new();
    for beta in sub_indices(alpha, k) {
        let lower = alpha.minus(&beta).expect("beta <= alpha");
        let term = Rational::from(multinomial(k, &beta)?) * w.rho_ratio(&lower, alpha)?;
        if beta.degree() % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(sum)
}

/// `(1/a(N)) Σ_{i=0}^{min(k,N)} (-1)^i C(k,i) a(N-i)`
pub fn defect_diag_radial(a: &RadialSequence, k: u64, degree: u64) -> Result<Rational> {
    if k == 0 {
        return Err(Error::InvalidArgument("defect order must be at least 1".into()));
    }
    let mut sum = Rational::new();
    for i in 0..=k.min(degree) {
        let term = Rational::from(binomial(k as i64, i)) * a.coeff_ratio(degree - i, degree)?;
        if i % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(sum)
}

/// `d_k` on every `|α| <= D`, in graded order.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectDiagonal {
    pub k: u64,
    pub entries: BTreeMap<MultiIndex, Rational>,
}

impl DefectDiagonal {
    pub fn compute(w: &WeightFunction, k: u64, max_degree: u32) -> Result<Self> {
        let indices = enumerate_leq_degree(w.dim(), max_degree);
        let values = indices
            .par_iter()
            .map(|alpha| defect_diag(w, k, alpha))
            .collect::<Result<Vec<_>>>()?;
        Ok(DefectDiagonal {
            k,
            entries: indices.into_iter().zip(values).collect(),
        })
    }

    /// Smallest entry, first in graded order on ties.
    pub fn minimum(&self) -> Option<(&MultiIndex, &Rational)> {
        self.entries
            .iter()
            .fold(None, |best: Option<(&MultiIndex, &Rational)>, cur| match best {
                Some(b) if b.1 <= cur.1 => Some(b),
                _ => Some(cur),
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HyperVerdict {
    /// Nothing negative among the scanned entries. Not a certificate: the
    /// defining condition ranges over all multi-indices.
    NoViolationUpTo,
    Violation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperWitness {
    pub k: u64,
    pub alpha: MultiIndex,
    #[serde(with = "rational_str")]
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperReport {
    pub n: u64,
    pub degree: u32,
    pub verdict: HyperVerdict,
    pub summary: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<HyperWitness>,
}

impl HyperReport {
    pub fn is_violation(&self) -> bool {
        self.verdict == HyperVerdict::Violation
    }
}

/// Scans `d_k(α)` for `1 <= k <= n`, `|α| <= D`. The witness is the first
/// negative entry in graded order of `α`, smallest `k` at that `α`.
pub fn is_n_hyper_up_to(w: &WeightFunction, n: u64, max_degree: u32) -> Result<HyperReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("order n must be at least 1".into()));
    }
    let indices = enumerate_leq_degree(w.dim(), max_degree);
    let found = indices.par_iter().find_map_first(|alpha| {
        for k in 1..=n {
            match defect_diag(w, k, alpha) {
                Ok(v) if v < 0 => {
                    return Some(Ok(HyperWitness {
                        k,
                        alpha: alpha.clone(),
                        value: v,
                    }))
                }
                Ok(_) => {}
                Err(e) => return Some(Err(e)),
            }
        }
        None
    });
    let witness = found.transpose()?;
    let (verdict, summary) = match &witness {
        Some(wit) => (
            HyperVerdict::Violation,
            format!(
                "violation: d_{}{} = {} < 0",
                wit.k, wit.alpha, wit.value
            ),
        ),
        None => (
            HyperVerdict::NoViolationUpTo,
            format!("no violation up to degree {max_degree} for orders 1..={n} (not a proof)"),
        ),
    };
    Ok(HyperReport {
        n,
        degree: max_degree,
        verdict,
        summary,
        witness,
    })
}

/// Exact comparison `Σ_{β ≤ α, |α-β| = 1} ρ(β)/ρ(α)` versus `|α|/(|α|+n-1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NecessaryCheck {
    pub alpha: MultiIndex,
    pub n: u64,
    #[serde(with = "rational_str")]
    pub lhs: Rational,
    #[serde(with = "rational_str")]
    pub rhs: Rational,
    pub holds: bool,
}

/// `Σ_{i: α_i >= 1} ρ(α - e_i)/ρ(α)`
pub fn incoming_ratio_sum(w: &WeightFunction, alpha: &MultiIndex) -> Result<Rational> {
    let mut lhs = Rational::new();
    for i in 0..alpha.dim() {
        if let Some(lower) = alpha.lowered(i) {
            lhs += w.rho_ratio(&lower, alpha)?;
        }
    }
    Ok(lhs)
}

pub fn necessary_condition(w: &WeightFunction, n: u64, alpha: &MultiIndex) -> Result<NecessaryCheck> {
    if n == 0 {
        return Err(Error::InvalidArgument("order n must be at least 1".into()));
    }
    if alpha.is_zero() {
        return Err(Error::InvalidArgument(
            "the necessary condition is stated for nonzero multi-indices".into(),
        ));
    }
    if alpha.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            found: alpha.dim(),
        });
    }
    let lhs = incoming_ratio_sum(w, alpha)?;
    let d = alpha.degree();
    let rhs = Rational::from((d, d + n - 1));
    let holds = lhs <= rhs;
    Ok(NecessaryCheck {
        alpha: alpha.clone(),
        n,
        lhs,
        rhs,
        holds,
    })
}

/// `a(i-1)/a(i) <= i/(i+n-1)`
pub fn radial_necessary(a: &RadialSequence, n: u64, i: u64) -> Result<bool> {
    if i == 0 || n == 0 {
        return Err(Error::InvalidArgument("need degree i >= 1 and order n >= 1".into()));
    }
    Ok(a.coeff_ratio(i - 1, i)? <= (i, i + n - 1))
}

/// Smallest order `n` at which the necessary condition fails at `α`.
///
/// With `L` the incoming ratio sum, failure means `L(|α|+n-1) > |α|`, i.e.
/// `n > |α|(1-L)/L + 1`.
pub fn subnormality_obstruction(w: &WeightFunction, alpha: &MultiIndex) -> Result<u64> {
    if alpha.is_zero() {
        return Err(Error::InvalidArgument(
            "the obstruction is stated for nonzero multi-indices".into(),
        ));
    }
    let l = incoming_ratio_sum(w, alpha)?;
    if l <= 0 {
        return Err(Error::Inconsistent("incoming ratio sum must be positive".into()));
    }
    let x = Rational::from(alpha.degree()) * (Rational::from(1) - &l) / &l;
    let mut n = x.floor().numer().clone();
    n += 2;
    Ok(if n < 1 { 1 } else { n.to_u64().expect("order fits in u64") })
}

/// Minimum of `d_n` over all `α' <= α`, with the graded-first minimiser.
pub fn defect_minimum_below(
    w: &WeightFunction,
    n: u64,
    alpha: &MultiIndex,
) -> Result<(MultiIndex, Rational)> {
    let mut best: Option<(MultiIndex, Rational)> = None;
    for lower in sub_indices(alpha, alpha.degree()) {
        let v = defect_diag(w, n, &lower)?;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((lower, v));
        }
    }
    Ok(best.expect("theta is always below alpha"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub n: u64,
    pub k_min: u64,
    pub k_max: u64,
    pub min: f64,
    pub max: f64,
    pub argmin: u64,
    pub argmax: u64,
    pub divergent: bool,
}

/// Empirical bracketing of `a(k)/k^{n-1}` over `k_min..=k_max`.
pub fn growth_diagnostic(a: &RadialSequence, n: u64, k_min: u64, k_max: u64) -> Result<GrowthReport> {
    if k_min == 0 || k_min > k_max || n == 0 {
        return Err(Error::InvalidArgument(
            "growth diagnostic needs 1 <= k_min <= k_max and n >= 1".into(),
        ));
    }
    let mut report = GrowthReport {
        n,
        k_min,
        k_max,
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        argmin: k_min,
        argmax: k_min,
        divergent: false,
    };
    for k in k_min..=k_max {
        let pow = rug::Integer::from(k).pow((n - 1) as u32);
        let v = (a.coeff(k)? / Rational::from(pow)).to_f64();
        if v < report.min {
            report.min = v;
            report.argmin = k;
        }
        if v > report.max {
            report.max = v;
            report.argmax = k;
        }
    }
    let spread = report.max / report.min;
    report.divergent = spread.is_nan() || spread > GROWTH_DIVERGENCE_RATIO;
    Ok(report)
}

trait IntegerPow {
    fn pow(self, e: u32) -> rug::Integer;
}

impl IntegerPow for rug::Integer {
    fn pow(self, e: u32) -> rug::Integer {
        use rug::ops::Pow;
        rug::Integer::from(Pow::pow(&self, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::enumerate_degree;

    fn r(p: i64, q: i64) -> Rational {
        Rational::from((p, q))
    }

    fn power(m: usize, n: u32) -> WeightFunction {
        WeightFunction::power(m, n).unwrap()
    }

    #[test]
    fn defect_examples() {
        let z = MultiIndex::zero(2);
        assert_eq!(defect_diag(&power(2, 3), 5, &z).unwrap(), 1);
        assert_eq!(defect_diag(&power(2, 2), 2, &MultiIndex::from([1, 0])).unwrap(), 0);
        assert_eq!(defect_diag(&power(2, 1), 1, &MultiIndex::from([1, 1])).unwrap(), 0);
        assert!(defect_diag(&power(2, 1), 0, &z).is_err());
        assert!(defect_diag(&power(2, 1), 1, &MultiIndex::zero(3)).is_err());
    }

    #[test]
    fn radial_defect_examples() {
        for n in 1..=4u32 {
            let a = RadialSequence::Power(n);
            assert_eq!(defect_diag_radial(&a, n as u64, 0).unwrap(), 1);
            for big_n in 1..12 {
                assert_eq!(defect_diag_radial(&a, n as u64, big_n).unwrap(), 0);
            }
        }
        let g = RadialSequence::Geometric(Rational::from(2));
        for big_n in 1..10 {
            assert_eq!(defect_diag_radial(&g, 1, big_n).unwrap(), r(1, 2));
        }
    }

    #[test]
    fn scan_verdicts() {
        let rep = is_n_hyper_up_to(&power(2, 3), 3, 8).unwrap();
        assert_eq!(rep.verdict, HyperVerdict::NoViolationUpTo);
        assert!(rep.witness.is_none());

        let ones = WeightFunction::radial(2, RadialSequence::List(vec![Rational::from(1); 12])).unwrap();
        assert!(!is_n_hyper_up_to(&ones, 1, 10).unwrap().is_violation());
        // d_2 vanishes from degree 2 on, but d_2(e_1) = a(1) - 2a(0) = -1
        let wit = is_n_hyper_up_to(&ones, 2, 10).unwrap().witness.unwrap();
        assert_eq!((wit.k, wit.alpha, wit.value), (2, MultiIndex::from([1, 0]), Rational::from(-1)));

        let dec: Vec<Rational> = (0..6).map(|i| r(1, i + 1)).collect();
        let w = WeightFunction::radial(1, RadialSequence::List(dec)).unwrap();
        let rep = is_n_hyper_up_to(&w, 1, 3).unwrap();
        let wit = rep.witness.unwrap();
        assert_eq!((wit.k, wit.alpha.clone()), (1, MultiIndex::from([1])));
        // 1 - a(0)/a(1) = 1 - 2
        assert_eq!(wit.value, -1);
    }

    #[test]
    fn necessary_condition_examples() {
        for n in 1..=4 {
            for alpha in enumerate_degree(2, 5) {
                let c = necessary_condition(&power(2, n), n as u64, &alpha).unwrap();
                assert_eq!(c.lhs, c.rhs);
                assert!(c.holds);
            }
        }
        let c = necessary_condition(&power(2, 1), 1, &MultiIndex::from([1, 0])).unwrap();
        assert_eq!((c.lhs.clone(), c.rhs.clone()), (Rational::from(1), Rational::from(1)));
        assert!(necessary_condition(&power(2, 1), 1, &MultiIndex::zero(2)).is_err());

        let p = WeightFunction::ray_perturbed(2, 2, 2).unwrap();
        let c = necessary_condition(&p, 2, &MultiIndex::from([2, 511])).unwrap();
        assert_eq!(c.lhs, r(513, 257));
        assert_eq!(c.rhs, r(513, 514));
        assert!(!c.holds);
    }

    #[test]
    fn radial_necessary_examples() {
        for n in 1..=4u64 {
            for i in 1..20 {
                assert!(radial_necessary(&RadialSequence::Power(n as u32), n, i).unwrap());
                assert_eq!(
                    RadialSequence::Power(n as u32).coeff_ratio(i - 1, i).unwrap(),
                    r(i as i64, (i + n - 1) as i64)
                );
            }
        }
        let ones = RadialSequence::List(vec![Rational::from(1); 3]);
        assert!(!radial_necessary(&ones, 2, 1).unwrap());
        assert!(radial_necessary(&RadialSequence::Geometric(Rational::from(2)), 1, 7).unwrap());
        assert!(radial_necessary(&ones, 2, 3).is_err());
    }

    fn obstruction_by_scan(w: &WeightFunction, alpha: &MultiIndex) -> u64 {
        (1..)
            .find(|&n| !necessary_condition(w, n, alpha).unwrap().holds)
            .unwrap()
    }

    #[test]
    fn obstruction_matches_scan() {
        for big_n in 1..=5u32 {
            let w = power(2, big_n);
            for alpha in [MultiIndex::from([1, 0]), MultiIndex::from([2, 3]), MultiIndex::from([0, 7])] {
                assert_eq!(subnormality_obstruction(&w, &alpha).unwrap(), big_n as u64 + 1);
                assert_eq!(obstruction_by_scan(&w, &alpha), big_n as u64 + 1);
            }
        }
        let p = WeightFunction::ray_perturbed(2, 2, 2).unwrap();
        let alpha = MultiIndex::from([2, 511]);
        assert_eq!(subnormality_obstruction(&p, &alpha).unwrap(), obstruction_by_scan(&p, &alpha));
        assert_eq!(subnormality_obstruction(&p, &alpha).unwrap(), 1);
    }

    #[test]
    fn growth_examples() {
        let g = growth_diagnostic(&RadialSequence::Power(2), 2, 1, 100).unwrap();
        assert_eq!(g.max, 2.0);
        assert!((g.min - 1.01).abs() < 1e-15);
        assert!(!g.divergent);
        let ones = RadialSequence::List(vec![Rational::from(1); 11]);
        let g = growth_diagnostic(&ones, 1, 1, 10).unwrap();
        assert_eq!((g.min, g.max), (1.0, 1.0));
        let g = growth_diagnostic(&RadialSequence::Geometric(Rational::from(2)), 2, 1, 40).unwrap();
        assert!(g.divergent && g.max / g.min > 1e6);
        assert!(growth_diagnostic(&ones, 1, 1, 11).is_err());
    }

    #[test]
    fn power_kernel_defects_positive_below_order() {
        for n in 1..=3u32 {
            let w = power(2, n);
            for k in 1..n as u64 {
                let diag = DefectDiagonal::compute(&w, k, 8).unwrap();
                assert!(diag.entries.values().all(|v| *v > 0));
            }
            let diag = DefectDiagonal::compute(&w, n as u64, 8).unwrap();
            let (argmin, min) = diag.minimum().unwrap();
            assert_eq!(*min, 0);
            assert_eq!(*argmin, MultiIndex::from([1, 0]));
        }
    }
}
