//! Finite matrix model of the backward shift tuple on
//! `span{e_α : |α| <= D}`, used as a brute-force oracle.
//!
//! Each `T_i` sends `e_α` to `sqrt(ρ(α-e_i)/ρ(α)) e_{α-e_i}`. Every product of
//! shifts and adjoints is a monomial operator (at most one nonzero per
//! column), so it is stored as a partial map `column -> (row, entry²)` with
//! exact rational squared entries. Square roots never appear on the exact
//! path. Since all shifts lower degree, truncation introduces no edge error.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use rug::Rational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multiindex::{enumerate_degree, enumerate_leq_degree, multinomial, MultiIndex};
use crate::report::rational_vec;
use crate::weights::WeightFunction;

/// Degree bound from which float cross-checks use sparse storage.
pub const DENSE_LIMIT: u32 = 30;

/// Operator with at most one nonzero entry per column and per row.
/// `map[c] = Some((r, s))` means `A e_c = sqrt(s) e_r` with `s > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialOp {
    map: Vec<Option<(usize, Rational)>>,
}

impl MonomialOp {
    pub fn identity(n: usize) -> Self {
        MonomialOp {
            map: (0..n).map(|c| Some((c, Rational::from(1)))).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.map.len()
    }

    pub fn column(&self, c: usize) -> Option<&(usize, Rational)> {
        self.map[c].as_ref()
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &MonomialOp) -> MonomialOp {
        MonomialOp {
            map: other
                .map
                .iter()
                .map(|e| {
                    e.as_ref().and_then(|(mid, s1)| {
                        self.map[*mid]
                            .as_ref()
                            .map(|(row, s2)| (*row, Rational::from(s1 * s2)))
                    })
                })
                .collect(),
        }
    }

    pub fn adjoint(&self) -> MonomialOp {
        let mut map = vec![None; self.dim()];
        for (c, e) in self.map.iter().enumerate() {
            if let Some((r, s)) = e {
                debug_assert!(map[*r].is_none(), "monomial operators are injective");
                map[*r] = Some((c, s.clone()));
            }
        }
        MonomialOp { map }
    }

    /// Squared diagonal entries, `None` if any entry lies off the diagonal.
    pub fn diagonal_squared(&self) -> Option<Vec<Rational>> {
        self.map
            .iter()
            .enumerate()
            .map(|(c, e)| match e {
                None => Some(Rational::new()),
                Some((r, s)) if *r == c => Some(s.clone()),
                Some(_) => None,
            })
            .collect()
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut a = DMatrix::zeros(n, n);
        for (c, e) in self.map.iter().enumerate() {
            if let Some((r, s)) = e {
                a[(*r, c)] = s.to_f64().sqrt();
            }
        }
        a
    }

    fn to_sparse(&self) -> SparseMatrix {
        let mut entries = BTreeMap::new();
        for (c, e) in self.map.iter().enumerate() {
            if let Some((r, s)) = e {
                entries.insert((*r, c), s.to_f64().sqrt());
            }
        }
        SparseMatrix {
            n: self.dim(),
            entries,
        }
    }
}

/// Coordinate-list float matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl SparseMatrix {
    fn identity(n: usize) -> Self {
        SparseMatrix {
            n,
            entries: (0..n).map(|i| ((i, i), 1.0)).collect(),
        }
    }

    fn transpose(&self) -> Self {
        SparseMatrix {
            n: self.n,
            entries: self.entries.iter().map(|(&(r, c), &v)| ((c, r), v)).collect(),
        }
    }

    fn mul(&self, other: &SparseMatrix) -> Self {
        let mut by_row: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
        for (&(r, c), &v) in &other.entries {
            by_row.entry(r).or_default().push((c, v));
        }
        let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (&(r, k), &a) in &self.entries {
            if let Some(row) = by_row.get(&k) {
                for &(c, b) in row {
                    *entries.entry((r, c)).or_insert(0.0) += a * b;
                }
            }
        }
        SparseMatrix { n: self.n, entries }
    }
}

#[derive(Clone, Debug)]
pub struct TruncatedTuple {
    weight: WeightFunction,
    degree: u32,
    basis: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
    shifts: Vec<MonomialOp>,
}

/// Builds `T_1, …, T_m` on `|α| <= D` and checks commutativity exactly.
pub fn build_truncated(w: &WeightFunction, degree: u32) -> Result<TruncatedTuple> {
    let m = w.dim();
    let basis = enumerate_leq_degree(m, degree);
    let index: HashMap<MultiIndex, usize> = basis
        .iter()
        .enumerate()
        .map(|(p, a)| (a.clone(), p))
        .collect();
    let mut shifts = Vec::with_capacity(m);
    for i in 0..m {
        let map = basis
            .iter()
            .map(|alpha| -> Result<Option<(usize, Rational)>> {
                match alpha.lowered(i) {
                    None => Ok(None),
                    Some(lower) => {
                        let s = w.rho_ratio(&lower, alpha)?;
                        Ok(Some((index[&lower], s)))
                    }
                }
            })
            .collect::<Result<Vec<_>>>()?;
        shifts.push(MonomialOp { map });
    }
    let tt = TruncatedTuple {
        weight: w.clone(),
        degree,
        basis,
        index,
        shifts,
    };
    if let Some((i, j, _)) = tt.commutator_defects().into_iter().find(|c| c.2 > 0) {
        return Err(Error::Inconsistent(format!(
            "T_{} and T_{} do not commute on the truncation",
            i + 1,
            j + 1
        )));
    }
    Ok(tt)
}

impl TruncatedTuple {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn m(&self) -> usize {
        self.shifts.len()
    }

    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    /// 0-based direction.
    pub fn shift(&self, i: usize) -> &MonomialOp {
        &self.shifts[i]
    }

    pub fn position(&self, alpha: &MultiIndex) -> Result<usize> {
        self.index.get(alpha).copied().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "{alpha} lies outside the truncation of degree {}",
                self.degree
            ))
        })
    }

    /// Number of columns where `T_iT_j` and `T_jT_i` differ, for `i < j`.
    pub fn commutator_defects(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.m() {
            for j in i + 1..self.m() {
                let a = self.shifts[i].compose(&self.shifts[j]);
                let b = self.shifts[j].compose(&self.shifts[i]);
                let bad = a.map.iter().zip(&b.map).filter(|(x, y)| x != y).count();
                out.push((i, j, bad));
            }
        }
        out
    }

    /// `T^β = T_1^{β_1} ⋯ T_m^{β_m}`
    pub fn power(&self, beta: &MultiIndex) -> MonomialOp {
        let mut acc = MonomialOp::identity(self.dim());
        for (i, &b) in beta.entries().iter().enumerate() {
            for _ in 0..b {
                acc = self.shifts[i].compose(&acc);
            }
        }
        acc
    }

    /// Diagonal of `T^{*β}T^β`, exact. Errors if the product is not diagonal.
    pub fn gram_diagonal(&self, beta: &MultiIndex) -> Result<Vec<Rational>> {
        let p = self.power(beta);
        let gram = p.adjoint().compose(&p);
        // entry² of a diagonal entry s·s is s², so take the square root exactly
        let squared = gram
            .diagonal_squared()
            .ok_or_else(|| Error::Inconsistent(format!("T*^{beta} T^{beta} is not diagonal")))?;
        Ok(p.map
            .iter()
            .zip(squared)
            .map(|(e, sq)| match e {
                Some((_, s)) => {
                    debug_assert_eq!(Rational::from(s * s), sq);
                    s.clone()
                }
                None => Rational::new(),
            })
            .collect())
    }

    fn signed_sum(&self, k: u64, betas: Vec<MultiIndex>, alternate: bool) -> Result<Vec<Rational>> {
        let mut acc = vec![Rational::new(); self.dim()];
        for beta in betas {
            // k!/(β!(k-|β|)!), which is k!/β! when |β| = k
            let coeff = Rational::from(multinomial(k, &beta)?);
            let negative = alternate && beta.degree() % 2 == 1;
            for (slot, g) in acc.iter_mut().zip(self.gram_diagonal(&beta)?) {
                let term = Rational::from(&coeff * &g);
                if negative {
                    *slot -= term;
                } else {
                    *slot += term;
                }
            }
        }
        Ok(acc)
    }

    /// Diagonal of `Δ^(k) = Σ_{|β| <= k} (-1)^{|β|} k!/(β!(k-|β|)!) T^{*β}T^β`.
    pub fn defect_operator(&self, k: u64) -> Result<Vec<Rational>> {
        if k == 0 {
            return Err(Error::InvalidArgument("defect order must be at least 1".into()));
        }
        let betas = enumerate_leq_degree(self.m(), k as u32);
        self.signed_sum(k, betas, true)
    }

    /// Diagonal of `M_T^k(I) = Σ_{|β| = k} k!/β! T^{*β}T^β`.
    pub fn m_power_diag(&self, k: u64) -> Result<Vec<Rational>> {
        if k == 0 {
            return Ok(vec![Rational::from(1); self.dim()]);
        }
        let betas = enumerate_degree(self.m(), k as u32);
        self.signed_sum(k, betas, false)
    }

    /// `M_T^k(I)` at `α` for `k = 0..=k_max`.
    pub fn decay_curve(&self, alpha: &MultiIndex, k_max: u64) -> Result<Vec<Rational>> {
        let pos = self.position(alpha)?;
        (0..=k_max)
            .map(|k| Ok(self.m_power_diag(k)?.swap_remove(pos)))
            .collect()
    }

    /// Largest relative gap between the exact diagonal of `T^{*β}T^β` and a
    /// float matrix product of square-root entries, over `|β| <= k`.
    /// Dense matrices below [`DENSE_LIMIT`], coordinate lists from there on.
    pub fn float_cross_check(&self, k: u64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for beta in enumerate_leq_degree(self.m(), k as u32) {
            let exact = self.gram_diagonal(&beta)?;
            let (diag, off): (Vec<f64>, f64) = if self.degree < DENSE_LIMIT {
                let mut p = DMatrix::<f64>::identity(self.dim(), self.dim());
                for (i, &b) in beta.entries().iter().enumerate() {
                    let t = self.shifts[i].to_dense();
                    for _ in 0..b {
                        p = &t * p;
                    }
                }
                let g = p.transpose() * p;
                let off = (0..self.dim())
                    .flat_map(|r| (0..self.dim()).map(move |c| (r, c)))
                    .filter(|(r, c)| r != c)
                    .map(|(r, c)| g[(r, c)].abs())
                    .fold(0.0, f64::max);
                ((0..self.dim()).map(|i| g[(i, i)]).collect(), off)
            } else {
                let mut p = SparseMatrix::identity(self.dim());
                for (i, &b) in beta.entries().iter().enumerate() {
                    let t = self.shifts[i].to_sparse();
                    for _ in 0..b {
                        p = t.mul(&p);
                    }
                }
                let g = p.transpose().mul(&p);
                let mut diag = vec![0.0; self.dim()];
                let mut off: f64 = 0.0;
                for (&(r, c), &v) in &g.entries {
                    if r == c {
                        diag[r] = v;
                    } else {
                        off = off.max(v.abs());
                    }
                }
                (diag, off)
            };
            worst = worst.max(off);
            for (e, f) in exact.iter().zip(diag) {
                let e = e.to_f64();
                worst = worst.max((e - f).abs() / e.abs().max(1.0));
            }
        }
        Ok(worst)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationSummary {
    pub degree: u32,
    pub dim: usize,
    pub commutator_nonzero_columns: Vec<usize>,
    pub k: u64,
    #[serde(with = "crate::report::rational_str")]
    pub defect_min: Rational,
    pub defect_argmin: MultiIndex,
    #[serde(with = "crate::report::rational_str")]
    pub defect_max: Rational,
    pub defect_argmax: MultiIndex,
    pub float_cross_check: Option<f64>,
    #[serde(with = "rational_vec")]
    pub decay_at_top: Vec<Rational>,
    pub decay_index: MultiIndex,
}

impl TruncatedTuple {
    /// Extrema of the order-`k` defect diagonal, commutator counts and the
    /// decay curve at the last basis vector.
    pub fn summary(&self, k: u64, cross_check: bool) -> Result<TruncationSummary> {
        let diag = self.defect_operator(k)?;
        let mut lo = 0;
        let mut hi = 0;
        for (p, v) in diag.iter().enumerate() {
            if *v < diag[lo] {
                lo = p;
            }
            if *v > diag[hi] {
                hi = p;
            }
        }
        let top = self.basis.last().expect("basis is never empty").clone();
        Ok(TruncationSummary {
            degree: self.degree,
            dim: self.dim(),
            commutator_nonzero_columns: self.commutator_defects().iter().map(|c| c.2).collect(),
            k,
            defect_min: diag[lo].clone(),
            defect_argmin: self.basis[lo].clone(),
            defect_max: diag[hi].clone(),
            defect_argmax: self.basis[hi].clone(),
            float_cross_check: if cross_check {
                Some(self.float_cross_check(k)?)
            } else {
                None
            },
            decay_at_top: self.decay_curve(&top, top.degree() + 1)?,
            decay_index: top,
        })
    }
}
