//! Complex Hessian of `log h` for the metric `h(w) = Σ ρ(α)|w^α|²`, curvature
//! differences, and plurisubharmonicity diagnostics for `ψ = log(h₁/h₂)`.
//!
//! With `x_i = |w_i|²`, `g_i = h_i/h` and `g_ij = h_ij/h - h_i h_j/h²`
//! (derivatives in `x`),
//! `∂_i ∂̄_j log h = δ_ij g_i + w̄_i w_j g_ij`.
//! The real jets are evaluated in MPFR; only the final assembly is `f64`.
//! The line-bundle curvature is the negative of this matrix.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rug::Float;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::weights::{MetricJet, MetricSeries, WeightFunction};

pub const DEFAULT_EVAL_DEGREE: u64 = 600;
pub const DEFAULT_TREND_THRESHOLD: f64 = 0.25;

fn serialize_complex_vec<S: Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
}

fn serialize_complex_mat<S: Serializer>(
    v: &[Vec<Complex64>],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    v.iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
        .collect::<Vec<_>>()
        .serialize(s)
}

/// `entries[i][j] = ∂²log h/∂w_i∂w̄_j` at `at`. Complex numbers serialize as
/// `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureMatrix {
    #[serde(serialize_with = "serialize_complex_vec")]
    pub at: Vec<Complex64>,
    #[serde(serialize_with = "serialize_complex_mat")]
    pub entries: Vec<Vec<Complex64>>,
    /// First-order bound on the entry error caused by series truncation.
    pub tail_error: f64,
}

impl CurvatureMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn from_entries(at: Vec<Complex64>, entries: Vec<Vec<Complex64>>) -> Self {
        CurvatureMatrix {
            at,
            entries,
            tail_error: 0.0,
        }
    }

    /// Coefficients of the curvature form, i.e. `-entries`.
    pub fn curvature_form(&self) -> Vec<Vec<Complex64>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|z| -z).collect())
            .collect()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CurvatureMatrix) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |H_ij - conj(H_ji)|`
    pub fn hermitian_defect(&self) -> f64 {
        let m = self.dim();
        let mut d: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                d = d.max((self.entries[i][j] - self.entries[j][i].conj()).norm());
            }
        }
        d
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let m = self.dim();
        DMatrix::from_fn(m, m, |i, j| self.entries[i][j])
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let a = self.to_matrix();
        let herm = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

fn assemble(w: &[Complex64], jet: &MetricJet) -> CurvatureMatrix {
    let m = w.len();
    let h = &jet.value;
    let prec = h.prec();
    let g: Vec<Float> = jet.grad.iter().map(|hi| Float::with_val(prec, hi / h)).collect();
    let mut gij = vec![vec![0.0f64; m]; m];
    let mut hij_over_h = vec![vec![0.0f64; m]; m];
    for i in 0..m {
        for j in 0..m {
            let a = Float::with_val(prec, &jet.hess[i][j] / h);
            let b = Float::with_val(prec, &g[i] * &g[j]);
            hij_over_h[i][j] = a.to_f64().abs();
            gij[i][j] = (a - b).to_f64();
        }
    }
    let hf = h.to_f64();
    let e0 = jet.tail_value.to_f64() / hf;
    let e1 = jet.tail_grad.to_f64() / hf;
    let e2 = jet.tail_hess.to_f64() / hf;
    let gf: Vec<f64> = g.iter().map(Float::to_f64).collect();
    let mut entries = vec![vec![Complex64::new(0.0, 0.0); m]; m];
    let mut tail_error: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let mut v = w[i].conj() * w[j] * gij[i][j];
            let mut err = w[i].norm() * w[j].norm()
                * (e2 + hij_over_h[i][j] * e0
                    + gf[i].abs() * (e1 + gf[j].abs() * e0)
                    + gf[j].abs() * (e1 + gf[i].abs() * e0));
            if i == j {
                v += gf[i];
                err += e1 + gf[i].abs() * e0;
            }
            entries[i][j] = v;
            tail_error = tail_error.max(err);
        }
    }
    CurvatureMatrix {
        at: w.to_vec(),
        entries,
        tail_error,
    }
}

fn check_point(series: &MetricSeries, w: &[Complex64]) -> Result<()> {
    if w.len() != series.dim() {
        return Err(Error::DimensionMismatch {
            expected: series.dim(),
            found: w.len(),
        });
    }
    Ok(())
}

impl MetricSeries {
    pub fn log_hessian(&self, w: &[Complex64]) -> Result<CurvatureMatrix> {
        check_point(self, w)?;
        Ok(assemble(w, &self.jet_at(w)?))
    }

    /// `log h` at complex coordinates given as high-precision real and
    /// imaginary parts.
    pub fn log_value_at_parts(&self, re: &[Float], im: &[Float]) -> Result<Float> {
        let x: Vec<Float> = re
            .iter()
            .zip(im)
            .map(|(u, v)| {
                Float::with_val(self.precision(), u * u) + Float::with_val(self.precision(), v * v)
            })
            .collect();
        let h = self.value_at_moduli(&x)?.value;
        Ok(h.ln())
    }
}

pub fn log_metric_hessian(
    w: &WeightFunction,
    point: &[Complex64],
    eval_degree: u64,
    prec: u32,
) -> Result<CurvatureMatrix> {
    MetricSeries::new(w, eval_degree, prec)?.log_hessian(point)
}

/// Complex Hessian of `ψ = log(h₁/h₂)`, i.e. `H₁ - H₂`. Swap the arguments
/// for the opposite sign convention.
pub fn curvature_difference(
    w1: &WeightFunction,
    w2: &WeightFunction,
    point: &[Complex64],
    eval_degree: u64,
    prec: u32,
) -> Result<CurvatureMatrix> {
    let a = log_metric_hessian(w1, point, eval_degree, prec)?;
    let b = log_metric_hessian(w2, point, eval_degree, prec)?;
    Ok(difference(&a, &b))
}

fn difference(a: &CurvatureMatrix, b: &CurvatureMatrix) -> CurvatureMatrix {
    let entries = a
        .entries
        .iter()
        .zip(&b.entries)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect();
    CurvatureMatrix {
        at: a.at.clone(),
        entries,
        tail_error: a.tail_error + b.tail_error,
    }
}

/// Positive semidefiniteness up to `tol` relative to the largest entry.
pub fn psd_check(h: &CurvatureMatrix, tol: f64) -> Result<bool> {
    let scale = h.max_abs_entry();
    let defect = h.hermitian_defect();
    if defect > tol * scale {
        return Err(Error::NotHermitian(defect));
    }
    let min = h.eigenvalues().first().copied().unwrap_or(0.0);
    Ok(min >= -tol * scale)
}

/// Sample points of the ball: `radial:<steps>x<angles>`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub steps: u32,
    pub angles: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            steps: 10,
            angles: 8,
        }
    }
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("grid must look like radial:<steps>x<angles>, got {s:?}"));
        let body = s.strip_prefix("radial:").ok_or_else(bad)?;
        let (a, b) = body.split_once('x').ok_or_else(bad)?;
        let steps: u32 = a.parse().map_err(|_| bad())?;
        let angles: u32 = b.parse().map_err(|_| bad())?;
        if steps == 0 || angles == 0 {
            return Err(bad());
        }
        Ok(GridSpec { steps, angles })
    }
}

impl GridSpec {
    /// `j/S` for `j < S`, then `1 - 1/(2S)`.
    pub fn radii(&self) -> Vec<f64> {
        let s = f64::from(self.steps);
        let mut r: Vec<f64> = (0..self.steps).map(|j| f64::from(j) / s).collect();
        r.push(1.0 - 0.5 / s);
        r
    }

    pub fn points(&self, m: usize) -> Vec<GridPoint> {
        let mut out = Vec::new();
        let a = self.angles;
        for r in self.radii() {
            if r == 0.0 {
                out.push(GridPoint {
                    radius: 0.0,
                    w: vec![Complex64::new(0.0, 0.0); m],
                });
                continue;
            }
            for j in 0..a {
                let theta = 2.0 * PI * f64::from(j) / f64::from(a);
                let w = if m == 1 {
                    vec![Complex64::from_polar(r, theta)]
                } else {
                    let phi = if a > 1 {
                        0.5 * PI * f64::from(j) / f64::from(a - 1)
                    } else {
                        0.25 * PI
                    };
                    let rest = r * phi.sin() / ((m - 1) as f64).sqrt();
                    (0..m)
                        .map(|k| {
                            let modulus = if k == 0 { r * phi.cos() } else { rest };
                            Complex64::from_polar(modulus, theta * (k + 1) as f64)
                        })
                        .collect()
                };
                out.push(GridPoint { radius: r, w });
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub radius: f64,
    pub w: Vec<Complex64>,
}

/// Per-point data of `ψ = log(h₁/h₂)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PshPoint {
    pub radius: f64,
    #[serde(serialize_with = "serialize_complex_vec")]
    pub w: Vec<Complex64>,
    pub psi: f64,
    /// Complex Hessian of `ψ`; its negative is `K₂ - K₁` in curvature terms.
    pub hessian: CurvatureMatrix,
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PshReport {
    pub points: usize,
    pub min_psi: f64,
    pub max_psi: f64,
    pub argmin_psi: usize,
    pub argmax_psi: usize,
    pub min_eigenvalue: f64,
    pub argmin_eigenvalue: usize,
    /// Every Hessian passed `psd_check` at `tol`.
    pub psd_on_grid: bool,
    pub tol: f64,
    /// Growth of `max|ψ|` between the two outermost rings against
    /// `-log(1-r²)`; `None` with fewer than two nonzero rings.
    pub trend_slope: Option<f64>,
    pub unbounded_trend: bool,
    pub max_tail_error: f64,
}

#[derive(Clone, Debug)]
pub struct PshOptions {
    pub eval_degree: u64,
    pub prec: u32,
    pub tol: f64,
    pub trend_threshold: f64,
}

impl Default for PshOptions {
    fn default() -> Self {
        PshOptions {
            eval_degree: DEFAULT_EVAL_DEGREE,
            prec: crate::weights::DEFAULT_PRECISION_BITS,
            tol: 1e-9,
            trend_threshold: DEFAULT_TREND_THRESHOLD,
        }
    }
}

pub fn psh_points(
    w1: &WeightFunction,
    w2: &WeightFunction,
    grid: &[GridPoint],
    opts: &PshOptions,
) -> Result<Vec<PshPoint>> {
    if w1.dim() != w2.dim() {
        return Err(Error::DimensionMismatch {
            expected: w1.dim(),
            found: w2.dim(),
        });
    }
    let s1 = MetricSeries::new(w1, opts.eval_degree, opts.prec)?;
    let s2 = MetricSeries::new(w2, opts.eval_degree, opts.prec)?;
    grid.par_iter()
        .map(|p| {
            let j1 = s1.jet_at(&p.w)?;
            let j2 = s2.jet_at(&p.w)?;
            let psi = Float::with_val(opts.prec, &j1.value / &j2.value).ln().to_f64();
            let hessian = difference(&assemble(&p.w, &j1), &assemble(&p.w, &j2));
            let eigenvalues = hessian.eigenvalues();
            Ok(PshPoint {
                radius: p.radius,
                w: p.w.clone(),
                psi,
                hessian,
                eigenvalues,
            })
        })
        .collect()
}

pub fn summarize_psh(points: &[PshPoint], opts: &PshOptions) -> Result<PshReport> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let mut rep = PshReport {
        points: points.len(),
        min_psi: f64::INFINITY,
        max_psi: f64::NEG_INFINITY,
        argmin_psi: 0,
        argmax_psi: 0,
        min_eigenvalue: f64::INFINITY,
        argmin_eigenvalue: 0,
        psd_on_grid: true,
        tol: opts.tol,
        trend_slope: None,
        unbounded_trend: false,
        max_tail_error: 0.0,
    };
    for (idx, p) in points.iter().enumerate() {
        if p.psi < rep.min_psi {
            rep.min_psi = p.psi;
            rep.argmin_psi = idx;
        }
        if p.psi > rep.max_psi {
            rep.max_psi = p.psi;
            rep.argmax_psi = idx;
        }
        let ev = p.eigenvalues.first().copied().unwrap_or(0.0);
        if ev < rep.min_eigenvalue {
            rep.min_eigenvalue = ev;
            rep.argmin_eigenvalue = idx;
        }
        // near-zero Hessians are judged against the truncation error
        let slack = p.hessian.tail_error.max(opts.tol * p.hessian.max_abs_entry());
        if ev < -slack {
            rep.psd_on_grid = false;
        }
        rep.max_tail_error = rep.max_tail_error.max(p.hessian.tail_error);
    }
    let mut rings: Vec<(f64, f64)> = Vec::new();
    for p in points.iter().filter(|p| p.radius > 0.0) {
        match rings.iter_mut().find(|(r, _)| *r == p.radius) {
            Some((_, m)) => *m = m.max(p.psi.abs()),
            None => rings.push((p.radius, p.psi.abs())),
        }
    }
    rings.sort_by(|a, b| a.0.total_cmp(&b.0));
    if rings.len() >= 2 {
        let (ra, ma) = rings[rings.len() - 2];
        let (rb, mb) = rings[rings.len() - 1];
        let s = (mb - ma) / ((1.0 - ra * ra).ln() - (1.0 - rb * rb).ln());
        rep.trend_slope = Some(s);
        rep.unbounded_trend = s > opts.trend_threshold;
    }
    Ok(rep)
}

pub fn psh_boundedness_report(
    w1: &WeightFunction,
    w2: &WeightFunction,
    grid: &[GridPoint],
    opts: &PshOptions,
) -> Result<PshReport> {
    summarize_psh(&psh_points(w1, w2, grid, opts)?, opts)
}

/// Max entrywise gap between the analytic Hessian of `log h` and a central
/// finite-difference Hessian in the real coordinates `(u, v)`, `w = u + iv`:
/// `∂_i∂̄_j f = ¼[f_{u_i u_j} + f_{v_i v_j} + i(f_{u_i v_j} - f_{v_i u_j})]`.
pub fn finite_diff_check(
    w: &WeightFunction,
    point: &[Complex64],
    step: f64,
    eval_degree: u64,
    prec: u32,
) -> Result<f64> {
    let series = MetricSeries::new(w, eval_degree, prec)?;
    check_point(&series, point)?;
    if step.is_nan() || step <= 0.0 {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let norm = point.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm + 2.0 * step >= 1.0 {
        return Err(Error::OutsideBall(norm + 2.0 * step));
    }
    let analytic = series.log_hessian(point)?;
    let m = point.len();
    let base: Vec<Float> = point
        .iter()
        .flat_map(|z| [Float::with_val(prec, z.re), Float::with_val(prec, z.im)])
        .collect();
    let h = Float::with_val(prec, step);
    // real coordinate index: 2k = Re w_k, 2k+1 = Im w_k
    let f = |shifts: &[(usize, i32)]| -> Result<Float> {
        let mut c = base.clone();
        for &(idx, s) in shifts {
            c[idx] += Float::with_val(prec, &h * s);
        }
        let re: Vec<Float> = c.iter().step_by(2).cloned().collect();
        let im: Vec<Float> = c.iter().skip(1).step_by(2).cloned().collect();
        series.log_value_at_parts(&re, &im)
    };
    let f0 = f(&[])?;
    let h2 = Float::with_val(prec, &h * &h);
    let second = |a: usize, b: usize| -> Result<Float> {
        if a == b {
            let v = f(&[(a, 1)])? - Float::with_val(prec, &f0 * 2u32) + f(&[(a, -1)])?;
            Ok(v / &h2)
        } else {
            let v = f(&[(a, 1), (b, 1)])? - f(&[(a, 1), (b, -1)])? - f(&[(a, -1), (b, 1)])?
                + f(&[(a, -1), (b, -1)])?;
            Ok(v / Float::with_val(prec, &h2 * 4u32))
        }
    };
    let mut dev: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let uu = second(2 * i, 2 * j)?;
            let vv = second(2 * i + 1, 2 * j + 1)?;
            let uv = second(2 * i, 2 * j + 1)?;
            let vu = second(2 * i + 1, 2 * j)?;
            let re = Float::with_val(prec, &uu + &vv).to_f64() / 4.0;
            let im = Float::with_val(prec, &uv - &vu).to_f64() / 4.0;
            dev = dev.max((analytic.entries[i][j] - Complex64::new(re, im)).norm());
        }
    }
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Rational;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn origin_is_diagonal_of_first_ratios() {
        for n in 1..=3 {
            let w = WeightFunction::power(2, n).unwrap();
            let h = log_metric_hessian(&w, &[c(0.0, 0.0); 2], 40, 80).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let want = if i == j { f64::from(n) } else { 0.0 };
                    assert!((h.entries[i][j] - c(want, 0.0)).norm() < 1e-12);
                }
            }
        }
        let g = WeightFunction::radial(2, crate::weights::RadialSequence::Geometric(Rational::from((3, 2)))).unwrap();
        let h = log_metric_hessian(&g, &[c(0.0, 0.0); 2], 40, 80).unwrap();
        assert!((h.entries[0][0].re - 1.5).abs() < 1e-12);
    }

    #[test]
    fn one_variable_closed_form() {
        // ∂∂̄ [-n log(1-|w|²)] = n (1-|w|²)^{-2}
        for n in 1..=3 {
            let w = WeightFunction::power(1, n).unwrap();
            let h = log_metric_hessian(&w, &[c(0.3, 0.4)], 400, 100).unwrap();
            let want = f64::from(n) * 16.0 / 9.0;
            assert!((h.entries[0][0] - c(want, 0.0)).norm() < 1e-12, "{n}");
            assert!(h.tail_error < 1e-12);
        }
    }

    #[test]
    fn ball_closed_form_two_variables() {
        // n [δ_ij/(1-t) + w̄_i w_j/(1-t)²]
        let w = WeightFunction::power(2, 2).unwrap();
        let p = [c(0.2, -0.1), c(0.3, 0.35)];
        let h = log_metric_hessian(&w, &p, 500, 100).unwrap();
        let t: f64 = p.iter().map(|z| z.norm_sqr()).sum();
        for i in 0..2 {
            for j in 0..2 {
                let mut want = p[i].conj() * p[j] * (2.0 / (1.0 - t).powi(2));
                if i == j {
                    want += 2.0 / (1.0 - t);
                }
                assert!((h.entries[i][j] - want).norm() < 1e-12);
            }
        }
        assert!(h.hermitian_defect() < 1e-15);
    }

    #[test]
    fn differences() {
        let w2 = WeightFunction::power(2, 2).unwrap();
        let w1 = WeightFunction::power(2, 1).unwrap();
        let zero = [c(0.0, 0.0); 2];
        let d = curvature_difference(&w2, &w1, &zero, 40, 80).unwrap();
        assert!((d.entries[0][0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(d.entries[0][1].norm() < 1e-12);
        let p = [c(0.1, 0.2), c(-0.3, 0.1)];
        let scaled = w1.clone().scaled(Rational::from(5)).unwrap();
        let d = curvature_difference(&scaled, &w1, &p, 200, 80).unwrap();
        assert!(d.max_abs_entry() < 1e-12);
    }

    #[test]
    fn psd_examples() {
        let id = CurvatureMatrix::from_entries(vec![c(0.0, 0.0); 2], vec![vec![c(3.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(3.0, 0.0)]]);
        assert!(psd_check(&id, 1e-12).unwrap());
        let indefinite = CurvatureMatrix::from_entries(vec![c(0.0, 0.0); 2], vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]]);
        assert!(!psd_check(&indefinite, 1e-12).unwrap());
        let skew = CurvatureMatrix::from_entries(vec![c(0.0, 0.0); 2], vec![vec![c(1.0, 0.0), c(0.5, 0.0)], vec![c(-0.5, 0.0), c(1.0, 0.0)]]);
        assert!(matches!(psd_check(&skew, 1e-12), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn grid_layout() {
        let g: GridSpec = "radial:10x8".parse().unwrap();
        assert_eq!(g, GridSpec::default());
        let radii = g.radii();
        assert_eq!(radii.len(), 11);
        assert_eq!(radii[10], 0.95);
        assert_eq!(g.points(1).len(), 1 + 10 * 8);
        for p in g.points(3) {
            let r: f64 = p.w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((r - p.radius).abs() < 1e-15);
        }
        for bad in ["radial:0x8", "radial:10", "polar:3x3", "radial:ax2"] {
            assert!(bad.parse::<GridSpec>().is_err());
        }
    }

    #[test]
    fn hardy_over_bergman_is_unbounded() {
        let h = WeightFunction::power(1, 1).unwrap();
        let b = WeightFunction::power(1, 2).unwrap();
        let pts = GridSpec::default().points(1);
        let opts = PshOptions { eval_degree: 1500, ..PshOptions::default() };
        let rep = psh_boundedness_report(&h, &b, &pts, &opts).unwrap();
        // ψ = log(1-|w|²)
        assert!((rep.min_psi - (1.0f64 - 0.9025).ln()).abs() < 1e-9);
        assert!(rep.unbounded_trend);
        assert!((rep.trend_slope.unwrap() - 1.0).abs() < 1e-9);
        // Bergman over Hardy: ψ = -log(1-|w|²), plurisubharmonic
        let rep = psh_boundedness_report(&b, &h, &pts, &opts).unwrap();
        assert!(rep.psd_on_grid && rep.min_eigenvalue >= 0.0);
    }

    #[test]
    fn finite_differences_converge() {
        let w = WeightFunction::power(1, 1).unwrap();
        let d1 = finite_diff_check(&w, &[c(0.3, 0.0)], 1e-4, 200, 100).unwrap();
        assert!(d1 < 1e-6, "{d1}");
        let coarse = finite_diff_check(&w, &[c(0.3, 0.2)], 1e-2, 200, 100).unwrap();
        let fine = finite_diff_check(&w, &[c(0.3, 0.2)], 5e-3, 200, 100).unwrap();
        let ratio = coarse / fine;
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
        assert!(finite_diff_check(&w, &[c(0.99, 0.0)], 1e-2, 200, 100).is_err());
    }
}
