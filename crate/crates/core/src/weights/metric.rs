//! High-precision evaluation of the metric `h(w) = K(w,w) = Σ ρ(α)|w^α|²`.
//!
//! `h` depends on `w` only through `x_i = |w_i|²`. The radial part is summed
//! as a one-variable series in `t = Σ x_i`, and the finitely many non-radial
//! corrections are added term by term. Derivatives are taken with respect to
//! the `x_i`; the complex Hessian is assembled from them in `curvature`.
//!
//! The tail beyond the truncation degree `D` is bounded geometrically using
//! the coefficient ratio `a(D+1)/a(D)`, assuming the ratios do not increase
//! past `D` (true for power, geometric and polynomial generators).

use num_complex::Complex64;
use rug::Float;

use super::WeightFunction;
use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;

pub const DEFAULT_PRECISION_BITS: u32 = 80;

/// Truncated value of `h` plus an upper bound on the omitted tail.
#[derive(Clone, Debug)]
pub struct MetricValue {
    pub value: Float,
    pub tail_bound: Float,
}

/// `h`, `∂h/∂x_i` and `∂²h/∂x_i∂x_j`, each with a tail bound.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub value: Float,
    pub grad: Vec<Float>,
    pub hess: Vec<Vec<Float>>,
    pub tail_value: Float,
    pub tail_grad: Float,
    pub tail_hess: Float,
}

/// Precomputed truncated series for one weight, degree and precision.
#[derive(Clone, Debug)]
pub struct MetricSeries {
    prec: u32,
    degree: u64,
    m: usize,
    radial: Vec<Float>,
    lead: Float,
    next_ratio: Float,
    corrections: Vec<(MultiIndex, Float)>,
    beyond: Vec<(MultiIndex, Float)>,
}

impl MetricSeries {
    pub fn new(w: &WeightFunction, degree: u64, prec: u32) -> Result<Self> {
        if prec < 53 {
            return Err(Error::InvalidArgument(format!(
                "precision must be at least 53 bits, got {prec}"
            )));
        }
        let base = w.base_sequence();
        let mut exact = Vec::with_capacity(degree as usize + 1);
        for d in 0..=degree {
            exact.push(base.coeff(d)? * w.scale());
        }
        let next_ratio = Float::with_val(prec, &base.tail_ratio_bound(degree)?);
        let mut corrections = Vec::new();
        let mut beyond = Vec::new();
        for (alpha, delta) in w.corrections()? {
            if alpha.is_zero() {
                // keeps h(0) = ρ(θ) exact
                exact[0] += delta;
            } else if alpha.degree() <= degree {
                corrections.push((alpha, Float::with_val(prec, &delta)));
            } else {
                beyond.push((alpha, Float::with_val(prec, &delta)));
            }
        }
        let lead = Float::with_val(prec, base.coeff(degree)? * w.scale());
        let radial = exact.iter().map(|c| Float::with_val(prec, c)).collect();
        Ok(MetricSeries {
            prec,
            degree,
            m: w.dim(),
            radial,
            lead,
            next_ratio,
            corrections,
            beyond,
        })
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    fn float(&self, v: f64) -> Float {
        Float::with_val(self.prec, v)
    }

    /// `x_i = |w_i|²` at working precision.
    pub fn moduli(&self, w: &[Complex64]) -> Result<Vec<Float>> {
        if w.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: w.len(),
            });
        }
        Ok(w
            .iter()
            .map(|z| {
                let re = self.float(z.re);
                let im = self.float(z.im);
                Float::with_val(self.prec, &re * &re) + Float::with_val(self.prec, &im * &im)
            })
            .collect())
    }

    fn radius_sq(&self, x: &[Float]) -> Result<Float> {
        if x.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: x.len(),
            });
        }
        let mut t = Float::with_val(self.prec, 0);
        for xi in x {
            if *xi < 0 {
                return Err(Error::InvalidArgument("negative squared modulus".into()));
            }
            t += xi;
        }
        if t >= 1 {
            return Err(Error::OutsideBall(t.to_f64()));
        }
        Ok(t)
    }

    fn ratio_check(&self, q: &Float) -> Result<()> {
        if *q >= 1 {
            return Err(Error::UnreliableTail {
                ratio: q.to_f64(),
                degree: self.degree,
            });
        }
        Ok(())
    }

    /// Geometric tail bound `first / (1 - q)`.
    fn geometric_tail(&self, first: Float, q: Float) -> Result<Float> {
        self.ratio_check(&q)?;
        let one_minus = Float::with_val(self.prec, 1) - q;
        Ok(first / one_minus)
    }

    fn monomial(&self, x: &[Float], alpha: &[u32]) -> Float {
        let mut p = Float::with_val(self.prec, 1);
        for (xi, &a) in x.iter().zip(alpha) {
            if a > 0 {
                p *= Float::with_val(self.prec, xi.pow_ref_u(a));
            }
        }
        p
    }

    /// `Σ_{d} c_d t^d` by Horner's rule.
    fn horner(&self, coeffs: impl DoubleEndedIterator<Item = Float>, t: &Float) -> Float {
        let mut acc = Float::with_val(self.prec, 0);
        for c in coeffs.rev() {
            acc *= t;
            acc += c;
        }
        acc
    }

    fn radial_tail_terms(&self, t: &Float) -> (Float, Float) {
        // first omitted coefficient times t^{D}, and q = t a(D+1)/a(D)
        let a_d = &self.lead;
        let t_pow = Float::with_val(self.prec, t.pow_ref_u(self.degree as u32));
        let q = Float::with_val(self.prec, t * &self.next_ratio);
        (Float::with_val(self.prec, a_d * &t_pow), q)
    }

    /// Truncated `h` at squared moduli `x`.
    pub fn value_at_moduli(&self, x: &[Float]) -> Result<MetricValue> {
        let t = self.radius_sq(x)?;
        let mut value = self.horner(self.radial.iter().cloned(), &t);
        for (alpha, delta) in &self.corrections {
            value += Float::with_val(self.prec, delta * &self.monomial(x, alpha.entries()));
        }
        let (lead, q) = self.radial_tail_terms(&t);
        // Σ_{d>D} a(d) t^d <= a(D) t^D q/(1-q)
        let mut tail = self.geometric_tail(Float::with_val(self.prec, &lead * &q), q)?;
        for (alpha, delta) in &self.beyond {
            tail += Float::with_val(self.prec, delta.abs_ref()) * self.monomial(x, alpha.entries());
        }
        Ok(MetricValue {
            value,
            tail_bound: tail,
        })
    }

    pub fn value_at(&self, w: &[Complex64]) -> Result<MetricValue> {
        self.value_at_moduli(&self.moduli(w)?)
    }

    /// `h` with its first and second partial derivatives in the `x_i`.
    pub fn jet_at_moduli(&self, x: &[Float]) -> Result<MetricJet> {
        if self.degree < 2 {
            return Err(Error::InvalidArgument(
                "derivative evaluation needs truncation degree at least 2".into(),
            ));
        }
        let t = self.radius_sq(x)?;
        let prec = self.prec;
        let value = self.horner(self.radial.iter().cloned(), &t);
        let first = self.horner(
            self.radial
                .iter()
                .enumerate()
                .skip(1)
                .map(|(d, c)| Float::with_val(prec, c * d as u32)),
            &t,
        );
        let second = self.horner(
            self.radial
                .iter()
                .enumerate()
                .skip(2)
                .map(|(d, c)| Float::with_val(prec, c * (d * (d - 1)) as u32)),
            &t,
        );

        let m = self.m;
        let mut h = value;
        let mut grad = vec![first; m];
        let mut hess = vec![vec![second; m]; m];
        for (alpha, delta) in &self.corrections {
            let e = alpha.entries();
            h += Float::with_val(prec, delta * &self.monomial(x, e));
            for i in 0..m {
                if e[i] == 0 {
                    continue;
                }
                let mut lowered = e.to_vec();
                lowered[i] -= 1;
                let gi = Float::with_val(prec, delta * e[i]) * self.monomial(x, &lowered);
                grad[i] += gi;
                for j in 0..m {
                    if lowered[j] == 0 {
                        continue;
                    }
                    let mut twice = lowered.clone();
                    twice[j] -= 1;
                    let hij = Float::with_val(prec, delta * e[i]) * lowered[j] * self.monomial(x, &twice);
                    hess[i][j] += hij;
                }
            }
        }

        // The k-th derivative series has successive-term ratio at most
        // q (D+2)/(D+1-k) from the first omitted term on.
        let (lead, q) = self.radial_tail_terms(&t);
        let d = self.degree as f64;
        let a_next = Float::with_val(prec, &self.lead * &self.next_ratio);
        let mut tail_value = self.geometric_tail(Float::with_val(prec, &lead * &q), q.clone())?;
        let grad_first = Float::with_val(prec, &a_next * (d + 1.0))
            * Float::with_val(prec, t.pow_ref_u(self.degree as u32));
        let mut tail_grad =
            self.geometric_tail(grad_first, Float::with_val(prec, &q * ((d + 2.0) / (d + 1.0))))?;
        let hess_first = Float::with_val(prec, &a_next * ((d + 1.0) * d))
            * Float::with_val(prec, t.pow_ref_u(self.degree as u32 - 1));
        let mut tail_hess =
            self.geometric_tail(hess_first, Float::with_val(prec, &q * ((d + 2.0) / d)))?;
        for (alpha, delta) in &self.beyond {
            // |∂^k x^α| <= |α|^k t^{|α|-k}
            let mag = Float::with_val(prec, delta.abs_ref());
            tail_value += Float::with_val(prec, &mag * &self.monomial(x, alpha.entries()));
            let deg = alpha.degree();
            let bound = |k: u32| -> Float {
                Float::with_val(prec, &mag * (deg as f64).powi(k as i32))
                    * Float::with_val(prec, t.pow_ref_u(deg.saturating_sub(k as u64) as u32))
            };
            tail_grad += bound(1);
            tail_hess += bound(2);
        }

        Ok(MetricJet {
            value: h,
            grad,
            hess,
            tail_value,
            tail_grad,
            tail_hess,
        })
    }

    pub fn jet_at(&self, w: &[Complex64]) -> Result<MetricJet> {
        self.jet_at_moduli(&self.moduli(w)?)
    }
}

trait PowRef {
    fn pow_ref_u(&self, e: u32) -> Float;
}

impl PowRef for Float {
    fn pow_ref_u(&self, e: u32) -> Float {
        use rug::ops::Pow;
        Float::with_val(self.prec(), self.pow(e))
    }
}

/// `h(w) = Σ_{|α| <= D} ρ(α)|w^α|²` with a geometric tail bound.
pub fn eval_metric(
    w: &WeightFunction,
    point: &[Complex64],
    degree: u64,
    prec: u32,
) -> Result<MetricValue> {
    MetricSeries::new(w, degree, prec)?.value_at(point)
}
