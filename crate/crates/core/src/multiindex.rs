//! Multi-indices over `Z_+^m` and exact verifiers for the binomial identities
//! the rest of the crate leans on.
//!
//! Enumeration order is graded: by degree first, then lexicographically
//! descending within a degree, so `(1,0)` precedes `(0,1)`. The [`Ord`]
//! implementation of [`MultiIndex`] follows the same order, which makes every
//! scan and matrix basis in the crate reproducible.

use std::cmp::Ordering;
use std::fmt;

use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    /// Panics if `entries` is empty; the ambient dimension is at least one.
    pub fn new(entries: impl Into<Vec<u32>>) -> Self {
        let entries = entries.into();
        assert!(!entries.is_empty(), "multi-index must have dimension >= 1");
        MultiIndex(entries)
    }

    pub fn zero(m: usize) -> Self {
        Self::new(vec![0; m])
    }

    /// `e_i` (0-based direction).
    pub fn unit(m: usize, i: usize) -> Self {
        let mut v = vec![0; m];
        v[i] = 1;
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&a| u64::from(a)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// `α! = α_1! ⋯ α_m!`
    pub fn factorial(&self) -> Integer {
        self.0
            .iter()
            .fold(Integer::from(1), |acc, &a| acc * Integer::from(Integer::factorial(a)))
    }

    /// Componentwise partial order.
    pub fn leq(&self, other: &MultiIndex) -> Result<bool> {
        self.check_dim(other)?;
        Ok(self.leq_unchecked(other))
    }

    pub(crate) fn leq_unchecked(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn check_dim(&self, other: &MultiIndex) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`, or `None` unless `other <= self`.
    pub fn minus(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if self.dim() != other.dim() {
            return None;
        }
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    /// `self + k e_i`
    pub fn shifted(&self, i: usize, k: u32) -> MultiIndex {
        let mut v = self.0.clone();
        v[i] += k;
        MultiIndex(v)
    }

    /// `self - e_i`, or `None` when the `i`-th entry is zero.
    pub fn lowered(&self, i: usize) -> Option<MultiIndex> {
        let mut v = self.0.clone();
        v[i] = v[i].checked_sub(1)?;
        Some(MultiIndex(v))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex::new(v)
    }
}

impl<const N: usize> From<[u32; N]> for MultiIndex {
    fn from(v: [u32; N]) -> Self {
        MultiIndex::new(v.to_vec())
    }
}

/// All `α` of dimension `m` with `|α| = d`, lexicographically descending.
pub fn enumerate_degree(m: usize, d: u32) -> Vec<MultiIndex> {
    assert!(m >= 1, "dimension must be >= 1");
    let mut out = Vec::new();
    let mut current = vec![0u32; m];
    fill_degree(&mut current, 0, d, &mut out);
    out
}

fn fill_degree(current: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for a in (0..=remaining).rev() {
        current[pos] = a;
        fill_degree(current, pos + 1, remaining - a, out);
    }
    current[pos] = 0;
}

/// All `α` with `|α| <= max_degree`, in graded order.
/// The count is `binomial(max_degree + m, m)`.
pub fn enumerate_leq_degree(m: usize, max_degree: u32) -> Vec<MultiIndex> {
    (0..=max_degree)
        .flat_map(|d| enumerate_degree(m, d))
        .collect()
}

/// All `β <= α` with `|β| <= max_degree`, in graded order.
pub fn sub_indices(alpha: &MultiIndex, max_degree: u64) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u32; alpha.dim()];
    fill_sub(alpha.entries(), &mut current, 0, max_degree, &mut out);
    out.sort();
    out
}

fn fill_sub(
    bound: &[u32],
    current: &mut Vec<u32>,
    pos: usize,
    budget: u64,
    out: &mut Vec<MultiIndex>,
) {
    if pos == bound.len() {
        out.push(MultiIndex(current.clone()));
        return;
    }
    let top = u64::from(bound[pos]).min(budget) as u32;
    for a in 0..=top {
        current[pos] = a;
        fill_sub(bound, current, pos + 1, budget - u64::from(a), out);
    }
    current[pos] = 0;
}

/// All `β <= α` with `|β| = degree`.
pub fn sub_indices_of_degree(alpha: &MultiIndex, degree: u64) -> Vec<MultiIndex> {
    sub_indices(alpha, degree)
        .into_iter()
        .filter(|b| b.degree() == degree)
        .collect()
}

/// Binomial coefficient with a possibly negative upper argument.
pub fn binomial(n: i64, k: u64) -> Integer {
    Integer::from(n).binomial(k as u32)
}

/// `k! / (α! (k - |α|)!)`
pub fn multinomial(k: u64, alpha: &MultiIndex) -> Result<Integer> {
    let deg = alpha.degree();
    if deg > k {
        return Err(Error::InvalidArgument(format!(
            "multinomial needs |alpha| <= k, got |{alpha}| = {deg} > {k}"
        )));
    }
    let num = Integer::from(Integer::factorial(k as u32));
    let den = alpha.factorial() * Integer::from(Integer::factorial((k - deg) as u32));
    Ok(num / den)
}

/// Checks `Σ_{α <= β, |α| = i} β! / (α! (β-α)!) = binomial(|β|, i)` exactly.
pub fn verify_vandermonde(beta: &MultiIndex, i: u64) -> Result<bool> {
    let total = beta.degree();
    if i > total {
        return Err(Error::InvalidArgument(format!(
            "degree {i} exceeds |beta| = {total}"
        )));
    }
    let beta_fact = beta.factorial();
    let mut sum = Integer::new();
    for alpha in sub_indices_of_degree(beta, i) {
        let rest = beta.minus(&alpha).expect("alpha <= beta");
        let den = alpha.factorial() * rest.factorial();
        sum += Integer::from(&beta_fact / &den);
    }
    Ok(sum == binomial(total as i64, i))
}

/// Checks that both `Σ (-1)^i C(n-2+i, i) C(n, j-i)` and the same sum weighted
/// by `i` vanish, with `i` running over `0..=j` when `j <= n` and over
/// `j-n..=j` when `j > n`.
pub fn verify_convolution_identities(n: u64, j: u64) -> Result<bool> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    if j < 2 {
        return Err(Error::InvalidArgument(format!("need j >= 2, got {j}")));
    }
    let start = j.saturating_sub(n);
    let mut plain = Integer::new();
    let mut weighted = Integer::new();
    for i in start..=j {
        let mut term = binomial((n - 2 + i) as i64, i) * binomial(n as i64, j - i);
        if i % 2 == 1 {
            term = -term;
        }
        weighted += Integer::from(&term * i);
        plain += term;
    }
    Ok(plain == 0 && weighted == 0)
}

/// Checks `Σ_{i=0}^{top} (-1)^i C(n, i) = (-1)^top C(n-1, top)` exactly.
pub fn verify_alternating_sum(n: u64, top: u64) -> bool {
    let mut lhs = Integer::new();
    for i in 0..=top {
        let term = binomial(n as i64, i);
        if i % 2 == 0 {
            lhs += term;
        } else {
            lhs -= term;
        }
    }
    let mut rhs = binomial(n as i64 - 1, top);
    if top % 2 == 1 {
        rhs = -rhs;
    }
    lhs == rhs
}
