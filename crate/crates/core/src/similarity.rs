//! Ray-ratio scans for similarity of weighted shift tuples, and the metric
//! ratio `h₁/h₂` on sample points.
//!
//! Along the ray `α, α+e_i, …, α+(l+1)e_i` the squared weight-ratio product
//! telescopes to `[ρ₁(α)/ρ₁(α+(l+1)e_i)] / [ρ₂(α)/ρ₂(α+(l+1)e_i)]`. Two
//! tuples are similar exactly when these stay in a compact subset of
//! `(0, ∞)` over all rays; a finite scan can only gather evidence.

use std::cmp::Ordering;

use num_complex::Complex64;
use rayon::prelude::*;
use rug::Rational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multiindex::{enumerate_leq_degree, MultiIndex};
use crate::report::rational_str;
use crate::weights::{MetricSeries, WeightFunction};

pub const DEFAULT_GROWTH_FACTOR: f64 = 1.5;

fn check_pair(w1: &WeightFunction, w2: &WeightFunction) -> Result<()> {
    if w1.dim() != w2.dim() {
        return Err(Error::DimensionMismatch {
            expected: w1.dim(),
            found: w2.dim(),
        });
    }
    Ok(())
}

/// Telescoped squared product along the ray of length `l` (0-based direction).
pub fn ray_ratio_sq(
    w1: &WeightFunction,
    w2: &WeightFunction,
    alpha: &MultiIndex,
    i: usize,
    l: u32,
) -> Result<Rational> {
    check_pair(w1, w2)?;
    if i >= w1.dim() {
        return Err(Error::InvalidArgument(format!(
            "direction {i} out of range for dimension {}",
            w1.dim()
        )));
    }
    let end = alpha.shifted(i, l + 1);
    Ok(w1.rho_ratio(alpha, &end)? / w2.rho_ratio(alpha, &end)?)
}

/// The same product taken literally, one shift weight at a time.
pub fn ray_ratio_sq_literal(
    w1: &WeightFunction,
    w2: &WeightFunction,
    alpha: &MultiIndex,
    i: usize,
    l: u32,
) -> Result<Rational> {
    check_pair(w1, w2)?;
    let mut p = Rational::from(1);
    for k in 0..=l {
        let at = alpha.shifted(i, k);
        p *= w1.shift_weight_sq(&at, i)? / w2.shift_weight_sq(&at, i)?;
    }
    Ok(p)
}

/// Position of a ray; `direction` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RayWitness {
    pub alpha: MultiIndex,
    pub direction: usize,
    pub length: u32,
}

impl RayWitness {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.alpha
            .cmp(&other.alpha)
            .then(self.direction.cmp(&other.direction))
            .then(self.length.cmp(&other.length))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanVerdict {
    BoundedInScan,
    GrowthFlagged,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioScanReport {
    pub degree: u32,
    pub ray_length: u32,
    #[serde(with = "rational_str")]
    pub min_ratio_sq: Rational,
    #[serde(with = "rational_str")]
    pub max_ratio_sq: Rational,
    pub argmin: RayWitness,
    pub argmax: RayWitness,
    /// `max/min` over lengths `<= L`.
    #[serde(with = "rational_str")]
    pub spread: Rational,
    /// `max/min` over lengths `<= ⌊L/2⌋`.
    #[serde(with = "rational_str")]
    pub half_spread: Rational,
    pub growth_factor: f64,
    pub verdict: ScanVerdict,
}

#[derive(Clone, Debug, Default)]
struct Extremes {
    min: Option<(Rational, RayWitness)>,
    max: Option<(Rational, RayWitness)>,
}

impl Extremes {
    fn push(&mut self, v: &Rational, at: &RayWitness) {
        let better_min = match &self.min {
            None => true,
            Some((m, w)) => v < m || (v == m && at.key_cmp(w) == Ordering::Less),
        };
        if better_min {
            self.min = Some((v.clone(), at.clone()));
        }
        let better_max = match &self.max {
            None => true,
            Some((m, w)) => v > m || (v == m && at.key_cmp(w) == Ordering::Less),
        };
        if better_max {
            self.max = Some((v.clone(), at.clone()));
        }
    }

    fn merge(mut self, other: Extremes) -> Extremes {
        for (v, at) in other.min.iter().chain(other.max.iter()) {
            self.push(v, at);
        }
        self
    }

    fn spread(&self) -> Rational {
        let (lo, _) = self.min.as_ref().expect("scan is never empty");
        let (hi, _) = self.max.as_ref().expect("scan is never empty");
        Rational::from(hi / lo)
    }
}

/// Extrema of `ray_ratio_sq` over `|α| <= D`, every direction and every
/// length `l <= L`. Ties go to the first ray in (graded α, direction, l)
/// order, so the report does not depend on thread scheduling.
pub fn similarity_scan(
    w1: &WeightFunction,
    w2: &WeightFunction,
    max_degree: u32,
    ray_length: u32,
) -> Result<RatioScanReport> {
    similarity_scan_with(w1, w2, max_degree, ray_length, DEFAULT_GROWTH_FACTOR)
}

pub fn similarity_scan_with(
    w1: &WeightFunction,
    w2: &WeightFunction,
    max_degree: u32,
    ray_length: u32,
    growth_factor: f64,
) -> Result<RatioScanReport> {
    check_pair(w1, w2)?;
    if growth_factor.is_nan() || growth_factor <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "growth factor must exceed 1, got {growth_factor}"
        )));
    }
    let half = ray_length / 2;
    let m = w1.dim();
    let indices = enumerate_leq_degree(m, max_degree);
    let (full, halfx) = indices
        .par_iter()
        .map(|alpha| -> Result<(Extremes, Extremes)> {
            let mut full = Extremes::default();
            let mut halfx = Extremes::default();
            for i in 0..m {
                for l in 0..=ray_length {
                    let v = ray_ratio_sq(w1, w2, alpha, i, l)?;
                    let at = RayWitness {
                        alpha: alpha.clone(),
                        direction: i + 1,
                        length: l,
                    };
                    full.push(&v, &at);
                    if l <= half {
                        halfx.push(&v, &at);
                    }
                }
            }
            Ok((full, halfx))
        })
        .try_reduce(
            || (Extremes::default(), Extremes::default()),
            |a, b| Ok((a.0.merge(b.0), a.1.merge(b.1))),
        )?;
    let spread = full.spread();
    let half_spread = halfx.spread();
    let flagged = spread.to_f64() >= growth_factor * half_spread.to_f64();
    let (min_ratio_sq, argmin) = full.min.expect("scan is never empty");
    let (max_ratio_sq, argmax) = full.max.expect("scan is never empty");
    Ok(RatioScanReport {
        degree: max_degree,
        ray_length,
        min_ratio_sq,
        max_ratio_sq,
        argmin,
        argmax,
        spread,
        half_spread,
        growth_factor,
        verdict: if flagged {
            ScanVerdict::GrowthFlagged
        } else {
            ScanVerdict::BoundedInScan
        },
    })
}

/// One scanned ray, for plotting.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RayRow {
    pub degree: u64,
    pub direction: usize,
    pub length: u32,
    #[serde(with = "rational_str")]
    pub ratio_sq: Rational,
}

/// Every ray of the scan in (graded α, direction, l) order.
pub fn ray_rows(
    w1: &WeightFunction,
    w2: &WeightFunction,
    max_degree: u32,
    ray_length: u32,
) -> Result<Vec<RayRow>> {
    check_pair(w1, w2)?;
    let mut rows = Vec::new();
    for alpha in enumerate_leq_degree(w1.dim(), max_degree) {
        for i in 0..w1.dim() {
            for l in 0..=ray_length {
                rows.push(RayRow {
                    degree: alpha.degree(),
                    direction: i + 1,
                    length: l,
                    ratio_sq: ray_ratio_sq(w1, w2, &alpha, i, l)?,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricRatioReport {
    pub min: f64,
    pub max: f64,
    pub argmin: usize,
    pub argmax: usize,
    /// Largest `tail/value` over both metrics and all samples.
    pub max_relative_tail: f64,
}

/// Extrema of `h₁(w)/h₂(w)` over the samples.
pub fn metric_ratio_report(
    w1: &WeightFunction,
    w2: &WeightFunction,
    samples: &[Vec<Complex64>],
    eval_degree: u64,
    prec: u32,
) -> Result<MetricRatioReport> {
    check_pair(w1, w2)?;
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no sample points".into()));
    }
    let s1 = MetricSeries::new(w1, eval_degree, prec)?;
    let s2 = MetricSeries::new(w2, eval_degree, prec)?;
    let values = samples
        .par_iter()
        .map(|w| -> Result<(f64, f64)> {
            let h1 = s1.value_at(w)?;
            let h2 = s2.value_at(w)?;
            let rel = (h1.tail_bound.to_f64() / h1.value.to_f64())
                .max(h2.tail_bound.to_f64() / h2.value.to_f64());
            Ok(((h1.value / h2.value).to_f64(), rel))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = MetricRatioReport {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        argmin: 0,
        argmax: 0,
        max_relative_tail: 0.0,
    };
    for (idx, (v, rel)) in values.into_iter().enumerate() {
        if v < report.min {
            report.min = v;
            report.argmin = idx;
        }
        if v > report.max {
            report.max = v;
            report.argmax = idx;
        }
        report.max_relative_tail = report.max_relative_tail.max(rel);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::RadialSequence;

    fn hardy_bergman() -> (WeightFunction, WeightFunction) {
        (
            WeightFunction::power(1, 1).unwrap(),
            WeightFunction::power(1, 2).unwrap(),
        )
    }

    #[test]
    fn identical_weights_give_one() {
        let w = WeightFunction::power(2, 2).unwrap();
        let rep = similarity_scan(&w, &w, 6, 4).unwrap();
        assert_eq!(rep.min_ratio_sq, 1);
        assert_eq!(rep.max_ratio_sq, 1);
        assert_eq!(rep.verdict, ScanVerdict::BoundedInScan);
        assert_eq!(rep.argmin, RayWitness { alpha: MultiIndex::zero(2), direction: 1, length: 0 });
    }

    #[test]
    fn hardy_versus_bergman_closed_form() {
        let (h, b) = hardy_bergman();
        for l in 0..10 {
            assert_eq!(
                ray_ratio_sq(&h, &b, &MultiIndex::from([0]), 0, l).unwrap(),
                Rational::from(l + 2)
            );
        }
        let rep = similarity_scan(&h, &b, 5, 8).unwrap();
        assert_eq!(rep.max_ratio_sq, 10);
        assert_eq!(rep.argmax, RayWitness { alpha: MultiIndex::from([0]), direction: 1, length: 8 });
        assert_eq!(rep.verdict, ScanVerdict::GrowthFlagged);
    }

    #[test]
    fn perturbed_ray_witness() {
        let p = WeightFunction::ray_perturbed(2, 2, 2).unwrap();
        let w = WeightFunction::power(2, 2).unwrap();
        let beta2 = MultiIndex::from([0, 511]);
        assert_eq!(ray_ratio_sq(&p, &w, &beta2, 0, 1).unwrap(), 2);
        assert_eq!(ray_ratio_sq(&w, &p, &beta2, 0, 1).unwrap(), Rational::from((1, 2)));
        assert_eq!(ray_ratio_sq(&w, &p, &MultiIndex::from([2, 511]), 0, 0).unwrap(), 2);
    }

    #[test]
    fn telescoped_equals_literal() {
        let w1 = WeightFunction::radial(2, RadialSequence::Geometric(Rational::from((3, 2)))).unwrap();
        let w2 = WeightFunction::power(2, 3).unwrap();
        for alpha in enumerate_leq_degree(2, 4) {
            for i in 0..2 {
                for l in 0..6 {
                    assert_eq!(
                        ray_ratio_sq(&w1, &w2, &alpha, i, l).unwrap(),
                        ray_ratio_sq_literal(&w1, &w2, &alpha, i, l).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn scan_rejects_bad_input() {
        let (h, _) = hardy_bergman();
        let w2 = WeightFunction::power(2, 1).unwrap();
        assert!(similarity_scan(&h, &w2, 2, 2).is_err());
        assert!(similarity_scan_with(&h, &h, 2, 2, 1.0).is_err());
        assert!(ray_ratio_sq(&h, &h, &MultiIndex::from([0]), 1, 0).is_err());
    }

    #[test]
    fn rows_cover_the_scan() {
        let (h, b) = hardy_bergman();
        let rows = ray_rows(&h, &b, 3, 2).unwrap();
        assert_eq!(rows.len(), 4 * 3);
        assert_eq!(rows[2].ratio_sq, 4);
    }

    #[test]
    fn metric_ratio_examples() {
        let pts: Vec<Vec<Complex64>> = (0..10)
            .map(|j| vec![Complex64::from_polar(0.09 * j as f64, 0.7 * j as f64)])
            .collect();
        let b = WeightFunction::power(1, 2).unwrap();
        let rep = metric_ratio_report(&b, &b, &pts, 200, 80).unwrap();
        assert_eq!((rep.min, rep.max), (1.0, 1.0));

        let radial = WeightFunction::radial(1, RadialSequence::Polynomial(vec![Rational::from(1), Rational::from(1)])).unwrap();
        let rep = metric_ratio_report(&radial, &b, &pts, 200, 80).unwrap();
        assert!((rep.min - 1.0).abs() < 1e-15 && (rep.max - 1.0).abs() < 1e-15);

        let tripled = b.clone().scaled(Rational::from(3)).unwrap();
        let rep = metric_ratio_report(&tripled, &b, &pts, 200, 80).unwrap();
        assert!((rep.min - 3.0).abs() < 1e-14 && (rep.max - 3.0).abs() < 1e-14);
        assert!(rep.max_relative_tail < 1e-10);
    }
}
