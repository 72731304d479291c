//! Weight functions `ρ(α) > 0` of diagonal reproducing kernels
//! `K(z,w) = Σ ρ(α) z^α w̄^α` and the shift weights they induce.
//!
//! Every weight is stored as a radial base `a(|α|)·|α|!/α!` times a positive
//! scale, plus (for tables and ray perturbations) finitely many exceptional
//! indices. All values are exact rationals.

mod metric;
mod spec;

use std::collections::BTreeMap;

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;

pub use metric::{eval_metric, MetricJet, MetricSeries, MetricValue, DEFAULT_PRECISION_BITS};
pub use spec::{parse_rational, RadialSpec, TableEntry, WeightSpec};

/// The coefficient sequence `a(i)` of a radial kernel `Σ a(i) ⟨z,w⟩^i`.
#[derive(Clone, Debug, PartialEq)]
pub enum RadialSequence {
    /// Explicit finite list `a(0), a(1), …`; lookups past the end fail.
    List(Vec<Rational>),
    /// `a(i) = C(n+i-1, i)`, the kernel `(1 - ⟨z,w⟩)^{-n}`.
    Power(u32),
    /// `a(i) = r^i`
    Geometric(Rational),
    /// `a(i) = Σ_j c_j i^j`
    Polynomial(Vec<Rational>),
}

impl RadialSequence {
    pub fn coeff(&self, i: u64) -> Result<Rational> {
        let value = match self {
            RadialSequence::List(values) => values
                .get(i as usize)
                .cloned()
                .ok_or(Error::SequenceExhausted {
                    index: i,
                    len: values.len(),
                })?,
            RadialSequence::Power(n) => {
                Rational::from(Integer::from(u64::from(*n) + i - 1).binomial(i as u32))
            }
            RadialSequence::Geometric(r) => r.pow_ref_u64(i),
            RadialSequence::Polynomial(coefficients) => {
                let x = Rational::from(i);
                coefficients
                    .iter()
                    .rev()
                    .fold(Rational::new(), |acc, c| acc * &x + c)
            }
        };
        if value <= 0 {
            return Err(Error::NonPositiveWeight(format!("a({i}) = {value}")));
        }
        Ok(value)
    }

    /// `a(num) / a(den)`, avoiding the full coefficients where a product
    /// formula exists.
    pub fn coeff_ratio(&self, num: u64, den: u64) -> Result<Rational> {
        match self {
            RadialSequence::Power(n) => {
                // a(i) = Π_{j=1}^{i} (n+j-1)/j
                let n = u64::from(*n);
                let (lo, hi) = if num <= den { (num, den) } else { (den, num) };
                let mut top = Integer::from(1);
                let mut bottom = Integer::from(1);
                for j in lo + 1..=hi {
                    top *= j;
                    bottom *= n + j - 1;
                }
                // a(lo)/a(hi) = top/bottom
                let r = Rational::from((top, bottom));
                Ok(if num <= den { r } else { r.recip() })
            }
            RadialSequence::Geometric(r) => {
                let diff = num.abs_diff(den);
                let p = r.pow_ref_u64(diff);
                Ok(if num >= den { p } else { p.recip() })
            }
            _ => Ok(self.coeff(num)? / self.coeff(den)?),
        }
    }

    /// Upper bound on `a(d+1)/a(d)` over all `d >= D`, used for series tails.
    ///
    /// Power and geometric ratios are non-increasing, so `d = D` is the worst
    /// case. A polynomial with nonnegative coefficients and degree `p` has
    /// ratio at most `((d+1)/d)^p`. Lists carry no information past their end;
    /// the last available ratio is used.
    pub fn tail_ratio_bound(&self, degree: u64) -> Result<Rational> {
        let at_d = self.coeff_ratio(degree + 1, degree)?;
        match self {
            RadialSequence::Polynomial(c) if c.iter().all(|x| *x >= 0) && degree > 0 => {
                let p = (c.len() - 1) as u64;
                let step = Rational::from((degree + 1, degree)).pow_ref_u64(p);
                Ok(if step > at_d { step } else { at_d })
            }
            _ => Ok(at_d),
        }
    }

    /// Number of coefficients available, `None` when unbounded.
    pub fn available_terms(&self) -> Option<usize> {
        match self {
            RadialSequence::List(values) => Some(values.len()),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            RadialSequence::List(values) => {
                if values.is_empty() {
                    return Err(Error::Spec("radial list must not be empty".into()));
                }
                for (i, v) in values.iter().enumerate() {
                    if *v <= 0 {
                        return Err(Error::NonPositiveWeight(format!("a({i}) = {v}")));
                    }
                }
            }
            RadialSequence::Power(n) => {
                if *n == 0 {
                    return Err(Error::Spec("power kernel order must be >= 1".into()));
                }
            }
            RadialSequence::Geometric(r) => {
                if *r <= 0 {
                    return Err(Error::Spec(format!("geometric ratio must be > 0, got {r}")));
                }
            }
            RadialSequence::Polynomial(c) => {
                if c.is_empty() {
                    return Err(Error::Spec("polynomial needs coefficients".into()));
                }
                self.coeff(0)?;
            }
        }
        Ok(())
    }
}

trait PowU64 {
    fn pow_ref_u64(&self, e: u64) -> Rational;
}

impl PowU64 for Rational {
    fn pow_ref_u64(&self, e: u64) -> Rational {
        use rug::ops::Pow;
        Rational::from(self.pow(e as u32))
    }
}

/// Exceptional indices of the ray-perturbed power kernel: on the `e_1`-ray
/// through each base point `β^l`, `ρ` is divided by `min(k, 2l-k)` at offset
/// `k ∈ 1..2l`.
#[derive(Clone, Debug, PartialEq)]
pub struct RayPerturbation {
    pub n: u32,
    pub blocks: u32,
    /// `bases[l-1] = |β^l|`; `β^l = b_l e_2`.
    pub bases: Vec<u64>,
}

impl RayPerturbation {
    /// Smallest admissible base degrees: `b_l > max(n^n 2^{3l+1}/(n-1)! - n, n-2)`
    /// and `b_{l-1} + 2(l-1) < b_l`.
    pub fn new(n: u32, blocks: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("ray perturbation needs n >= 2, got {n}")));
        }
        if blocks < 1 {
            return Err(Error::InvalidArgument("ray perturbation needs at least one block".into()));
        }
        let mut bases: Vec<u64> = Vec::with_capacity(blocks as usize);
        for l in 1..=u64::from(blocks) {
            let threshold = base_threshold(n, l);
            let mut b = threshold.floor_ref_u64() + 1;
            if let Some(&prev) = bases.last() {
                b = b.max(prev + 2 * (l - 1) + 1);
            }
            bases.push(b);
        }
        Ok(RayPerturbation { n, blocks, bases })
    }

    /// `β^l` as a multi-index of dimension `m` (1-based block index).
    pub fn base_point(&self, m: usize, l: u32) -> MultiIndex {
        let mut v = vec![0u32; m];
        v[1] = self.bases[(l - 1) as usize] as u32;
        MultiIndex::new(v)
    }

    /// `Some((l, k))` when `α = β^l + k e_1` with `1 <= k <= 2l - 1`.
    pub fn locate(&self, alpha: &MultiIndex) -> Option<(u32, u32)> {
        let e = alpha.entries();
        if e.len() < 2 || e[2..].iter().any(|&a| a != 0) || e[0] == 0 {
            return None;
        }
        let l = self.bases.iter().position(|&b| b == u64::from(e[1]))? as u32 + 1;
        (e[0] < 2 * l).then_some((l, e[0]))
    }

    /// The divisor `ρ_n(α)/ρ̃(α)`; 1 off the perturbed rays.
    pub fn divisor(&self, alpha: &MultiIndex) -> u32 {
        match self.locate(alpha) {
            Some((l, k)) => k.min(2 * l - k),
            None => 1,
        }
    }

    /// All perturbed indices with their divisors (including divisor-1 ones),
    /// ordered by block then offset.
    pub fn perturbed_points(&self, m: usize) -> Vec<(MultiIndex, u32)> {
        let mut out = Vec::new();
        for l in 1..=self.blocks {
            let base = self.base_point(m, l);
            for k in 1..2 * l {
                out.push((base.shifted(0, k), k.min(2 * l - k)));
            }
        }
        out
    }
}

trait FloorU64 {
    fn floor_ref_u64(&self) -> u64;
}

impl FloorU64 for Rational {
    fn floor_ref_u64(&self) -> u64 {
        let f = Integer::from(self.floor_ref());
        if f < 0 {
            0
        } else {
            f.to_u64().expect("base degree fits in u64")
        }
    }
}

/// `max(n^n 2^{3l+1}/(n-1)! - n, n-2)`
pub fn base_threshold(n: u32, l: u64) -> Rational {
    let n_int = Integer::from(n);
    let numer = n_int.pow_ref_u32(n) << (3 * l + 1) as u32;
    let first = Rational::from((numer, Integer::from(Integer::factorial(n - 1)))) - n;
    let second = Rational::from(i64::from(n) - 2);
    if first > second {
        first
    } else {
        second
    }
}

trait PowU32 {
    fn pow_ref_u32(&self, e: u32) -> Integer;
}

impl PowU32 for Integer {
    fn pow_ref_u32(&self, e: u32) -> Integer {
        use rug::ops::Pow;
        Integer::from(self.pow(e))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightKind {
    Power { n: u32 },
    Radial(RadialSequence),
    Table {
        entries: BTreeMap<MultiIndex, Rational>,
        fallback: RadialSequence,
    },
    RayPerturbed(RayPerturbation),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunction {
    m: usize,
    kind: WeightKind,
    scale: Rational,
}

impl WeightFunction {
    /// `ρ_n(α) = (n+|α|-1)! / (α! (n-1)!)`
    pub fn power(m: usize, n: u32) -> Result<Self> {
        Self::build(m, WeightKind::Power { n })
    }

    /// `ρ(α) = a(|α|) |α|!/α!`
    pub fn radial(m: usize, a: RadialSequence) -> Result<Self> {
        Self::build(m, WeightKind::Radial(a))
    }

    /// Explicit values on finitely many indices, radial fallback elsewhere.
    pub fn table(
        m: usize,
        entries: BTreeMap<MultiIndex, Rational>,
        fallback: RadialSequence,
    ) -> Result<Self> {
        Self::build(m, WeightKind::Table { entries, fallback })
    }

    /// The power kernel of order `n` divided along `blocks` rays, with the
    /// smallest admissible base points on the `e_2`-axis.
    pub fn ray_perturbed(n: u32, m: usize, blocks: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!(
                "ray perturbation needs dimension >= 2, got {m}"
            )));
        }
        Self::build(m, WeightKind::RayPerturbed(RayPerturbation::new(n, blocks)?))
    }

    fn build(m: usize, kind: WeightKind) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        match &kind {
            WeightKind::Power { n } => RadialSequence::Power(*n).validate()?,
            WeightKind::Radial(a) => a.validate()?,
            WeightKind::Table { entries, fallback } => {
                fallback.validate()?;
                for (alpha, v) in entries {
                    if alpha.dim() != m {
                        return Err(Error::DimensionMismatch {
                            expected: m,
                            found: alpha.dim(),
                        });
                    }
                    if *v <= 0 {
                        return Err(Error::NonPositiveWeight(format!("rho{alpha} = {v}")));
                    }
                }
            }
            WeightKind::RayPerturbed(_) => {}
        }
        Ok(WeightFunction {
            m,
            kind,
            scale: Rational::from(1),
        })
    }

    /// Multiplies every `ρ(α)` by `c > 0`.
    pub fn scaled(mut self, c: Rational) -> Result<Self> {
        if c <= 0 {
            return Err(Error::InvalidArgument(format!("scale must be > 0, got {c}")));
        }
        self.scale *= c;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    /// The radial sequence underlying the weight (the fallback for tables, the
    /// unperturbed power kernel for ray perturbations).
    pub fn base_sequence(&self) -> RadialSequence {
        match &self.kind {
            WeightKind::Power { n } => RadialSequence::Power(*n),
            WeightKind::Radial(a) => a.clone(),
            WeightKind::Table { fallback, .. } => fallback.clone(),
            WeightKind::RayPerturbed(p) => RadialSequence::Power(p.n),
        }
    }

    /// `Some(a)` when `ρ(α) = scale · a(|α|) |α|!/α!` for every `α`.
    pub fn radial_sequence(&self) -> Option<RadialSequence> {
        match &self.kind {
            WeightKind::Power { .. } | WeightKind::Radial(_) => Some(self.base_sequence()),
            _ => None,
        }
    }

    fn check(&self, alpha: &MultiIndex) -> Result<()> {
        if alpha.dim() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: alpha.dim(),
            });
        }
        Ok(())
    }

    fn unscaled_base(&self, alpha: &MultiIndex) -> Result<Rational> {
        let a = self.base_sequence().coeff(alpha.degree())?;
        Ok(a * multinomial_coefficient(alpha))
    }

    fn unscaled(&self, alpha: &MultiIndex) -> Result<Rational> {
        match &self.kind {
            WeightKind::Table { entries, .. } => match entries.get(alpha) {
                Some(v) => Ok(v.clone()),
                None => self.unscaled_base(alpha),
            },
            WeightKind::RayPerturbed(p) => {
                Ok(self.unscaled_base(alpha)? / Rational::from(p.divisor(alpha)))
            }
            _ => self.unscaled_base(alpha),
        }
    }

    pub fn rho(&self, alpha: &MultiIndex) -> Result<Rational> {
        self.check(alpha)?;
        Ok(self.unscaled(alpha)? * &self.scale)
    }

    /// `ρ(num) / ρ(den)` exactly, computed from short factorial products so
    /// that high-degree indices never materialise their full factorials.
    pub fn rho_ratio(&self, num: &MultiIndex, den: &MultiIndex) -> Result<Rational> {
        self.check(num)?;
        self.check(den)?;
        match &self.kind {
            WeightKind::Table { entries, .. }
                if entries.contains_key(num) || entries.contains_key(den) =>
            {
                Ok(self.unscaled(num)? / self.unscaled(den)?)
            }
            WeightKind::RayPerturbed(p) => {
                let base = self.base_ratio(num, den)?;
                Ok(base * Rational::from((p.divisor(den), p.divisor(num))))
            }
            _ => self.base_ratio(num, den),
        }
    }

    fn base_ratio(&self, num: &MultiIndex, den: &MultiIndex) -> Result<Rational> {
        let a = self
            .base_sequence()
            .coeff_ratio(num.degree(), den.degree())?;
        // (|num|!/num!) / (|den|!/den!)
        let mut r = factorial_ratio(num.degree(), den.degree());
        for (x, y) in num.entries().iter().zip(den.entries()) {
            r *= factorial_ratio(u64::from(*y), u64::from(*x));
        }
        Ok(a * r)
    }

    /// `(λ_α^{(i)})² = ρ(α) / ρ(α + e_i)` (0-based direction).
    pub fn shift_weight_sq(&self, alpha: &MultiIndex, i: usize) -> Result<Rational> {
        self.check(alpha)?;
        if i >= self.m {
            return Err(Error::InvalidArgument(format!(
                "direction {i} out of range for dimension {}",
                self.m
            )));
        }
        self.rho_ratio(alpha, &alpha.shifted(i, 1))
    }

    /// Floating-point view of `λ_α^{(i)}`, for display.
    pub fn shift_weight(&self, alpha: &MultiIndex, i: usize) -> Result<f64> {
        Ok(self.shift_weight_sq(alpha, i)?.to_f64().sqrt())
    }

    /// Non-radial corrections `ρ(α) - scale·a(|α|)|α|!/α!`, nonzero entries
    /// only, in graded order.
    pub fn corrections(&self) -> Result<Vec<(MultiIndex, Rational)>> {
        let mut out = Vec::new();
        match &self.kind {
            WeightKind::Table { entries, .. } => {
                for (alpha, v) in entries {
                    let delta = (v.clone() - self.unscaled_base(alpha)?) * &self.scale;
                    if delta != 0 {
                        out.push((alpha.clone(), delta));
                    }
                }
            }
            WeightKind::RayPerturbed(p) => {
                for (alpha, d) in p.perturbed_points(self.m) {
                    if d > 1 {
                        let base = self.unscaled_base(&alpha)? * &self.scale;
                        let delta = base.clone() / Rational::from(d) - base;
                        out.push((alpha, delta));
                    }
                }
            }
            _ => {}
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }
}

/// `|α|! / α!`
pub fn multinomial_coefficient(alpha: &MultiIndex) -> Integer {
    Integer::from(Integer::factorial(alpha.degree() as u32)) / alpha.factorial()
}

/// `a! / b!` as an exact rational.
fn factorial_ratio(a: u64, b: u64) -> Rational {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut p = Integer::from(1);
    for j in lo + 1..=hi {
        p *= j;
    }
    if a >= b {
        Rational::from(p)
    } else {
        Rational::from((Integer::from(1), p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn rho_examples() {
        for n in 1..5 {
            let w = WeightFunction::power(3, n).unwrap();
            assert_eq!(w.rho(&MultiIndex::zero(3)).unwrap(), 1);
        }
        assert_eq!(WeightFunction::power(2, 2).unwrap().rho(&mi(&[1, 0])).unwrap(), 2);
        assert_eq!(WeightFunction::power(2, 1).unwrap().rho(&mi(&[1, 1])).unwrap(), 2);
    }

    #[test]
    fn shift_weight_examples() {
        let hardy = WeightFunction::power(1, 1).unwrap();
        for k in 0..10 {
            assert_eq!(hardy.shift_weight_sq(&mi(&[k]), 0).unwrap(), 1);
        }
        let da = WeightFunction::power(2, 1).unwrap();
        assert_eq!(da.shift_weight_sq(&mi(&[1, 0]), 1).unwrap(), q(1, 2));

        let mut entries = BTreeMap::new();
        entries.insert(mi(&[1, 0]), q(3, 1));
        entries.insert(mi(&[2, 0]), q(15, 1));
        let t = WeightFunction::table(2, entries, RadialSequence::Power(1)).unwrap();
        assert_eq!(t.shift_weight_sq(&mi(&[1, 0]), 0).unwrap(), q(1, 5));
        assert!((t.shift_weight(&mi(&[1, 0]), 0).unwrap() - (0.2f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn explicit_list_errors_past_end() {
        let w = WeightFunction::radial(2, RadialSequence::List(vec![q(1, 1), q(2, 1)])).unwrap();
        assert_eq!(w.rho(&mi(&[1, 0])).unwrap(), 2);
        assert!(matches!(
            w.rho(&mi(&[1, 1])),
            Err(Error::SequenceExhausted { index: 2, len: 2 })
        ));
    }

    #[test]
    fn invalid_weights_rejected() {
        assert!(WeightFunction::power(2, 0).is_err());
        assert!(WeightFunction::radial(1, RadialSequence::List(vec![q(1, 1), q(0, 1)])).is_err());
        assert!(WeightFunction::radial(1, RadialSequence::Geometric(q(-1, 2))).is_err());
        assert!(WeightFunction::ray_perturbed(1, 2, 2).is_err());
        assert!(WeightFunction::ray_perturbed(2, 1, 2).is_err());
        let p = WeightFunction::radial(1, RadialSequence::Polynomial(vec![q(3, 1), q(-1, 1)])).unwrap();
        assert!(matches!(p.rho(&mi(&[3])), Err(Error::NonPositiveWeight(_))));
    }

    #[test]
    fn base_points_for_order_two() {
        // n=2: 4·2^{3l+1} - 2 gives 62 and 510.
        assert_eq!(base_threshold(2, 1), 62);
        assert_eq!(base_threshold(2, 2), 510);
        let p = RayPerturbation::new(2, 2).unwrap();
        assert_eq!(p.bases, vec![63, 511]);
        let p3 = RayPerturbation::new(2, 3).unwrap();
        assert_eq!(p3.bases, vec![63, 511, 4095]);
    }

    #[test]
    fn perturbation_divisors() {
        let w = WeightFunction::ray_perturbed(2, 2, 2).unwrap();
        let base = WeightFunction::power(2, 2).unwrap();
        // k = 1 leaves ρ unchanged
        let a = mi(&[1, 511]);
        assert_eq!(w.rho(&a).unwrap(), base.rho(&a).unwrap());
        let peak = mi(&[2, 511]);
        assert_eq!(w.rho(&peak).unwrap() * 2u32, base.rho(&peak).unwrap());
        assert_eq!(w.rho(&mi(&[3, 511])).unwrap(), base.rho(&mi(&[3, 511])).unwrap());
        assert_eq!(w.rho(&mi(&[4, 511])).unwrap(), base.rho(&mi(&[4, 511])).unwrap());
        assert_eq!(w.rho(&mi(&[2, 510])).unwrap(), base.rho(&mi(&[2, 510])).unwrap());
        let corr = w.corrections().unwrap();
        assert_eq!(corr.len(), 1);
        assert_eq!(corr[0].0, peak);
    }

    #[test]
    fn divisor_profile_is_symmetric() {
        let p = RayPerturbation::new(3, 4).unwrap();
        for l in 1..=4u32 {
            let base = p.base_point(3, l);
            for k in 1..2 * l {
                let d1 = p.divisor(&base.shifted(0, k));
                let d2 = p.divisor(&base.shifted(0, 2 * l - k));
                assert_eq!(d1, d2);
            }
            assert_eq!(p.divisor(&base.shifted(0, l)), l);
            assert_eq!(p.divisor(&base), 1);
            assert_eq!(p.divisor(&base.shifted(0, 2 * l)), 1);
        }
    }

    #[test]
    fn rho_ratio_matches_direct_quotient() {
        let weights = vec![
            WeightFunction::power(2, 3).unwrap(),
            WeightFunction::radial(2, RadialSequence::Geometric(q(3, 2))).unwrap(),
            WeightFunction::radial(2, RadialSequence::Polynomial(vec![q(1, 1), q(1, 1)])).unwrap(),
            WeightFunction::power(2, 2).unwrap().scaled(q(7, 3)).unwrap(),
        ];
        let pts = crate::multiindex::enumerate_leq_degree(2, 5);
        for w in &weights {
            for a in &pts {
                for b in &pts {
                    let direct = w.rho(a).unwrap() / w.rho(b).unwrap();
                    assert_eq!(w.rho_ratio(a, b).unwrap(), direct, "{a} / {b}");
                }
            }
        }
    }

    #[test]
    fn scaled_weights_keep_ratios() {
        let w = WeightFunction::power(2, 2).unwrap();
        let s = w.clone().scaled(q(5, 1)).unwrap();
        let a = mi(&[2, 1]);
        assert_eq!(s.rho(&a).unwrap(), w.rho(&a).unwrap() * 5u32);
        assert_eq!(s.shift_weight_sq(&a, 1).unwrap(), w.shift_weight_sq(&a, 1).unwrap());
        assert!(w.scaled(q(0, 1)).is_err());
    }
}
