//! End-to-end reproduction of the ray-perturbed power kernel counterexample:
//! a weight whose kernel stays uniformly comparable to `(1-|w|²)^{-n}` while
//! the tuple fails to be an `n`-hypercontraction and fails similarity.

use rug::ops::Pow;
use rug::Rational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::curvature::{psh_boundedness_report, GridSpec, PshOptions};
use crate::error::{Error, Result};
use crate::hypercontraction::{is_n_hyper_up_to, necessary_condition};
use crate::report::SCHEMA_VERSION;
use crate::similarity::ray_ratio_sq;
use crate::weights::{MetricSeries, RayPerturbation, WeightFunction, WeightKind};

#[derive(Clone, Debug)]
pub struct Example45Options {
    pub n: u32,
    pub m: usize,
    pub blocks: u32,
    pub grid: GridSpec,
    pub psh: PshOptions,
    /// Series degree for the floating cross-check of the product bound.
    pub bound_eval_degree: u64,
}

impl Default for Example45Options {
    fn default() -> Self {
        Example45Options {
            n: 2,
            m: 2,
            blocks: 2,
            grid: GridSpec::default(),
            psh: PshOptions::default(),
            bound_eval_degree: 8000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stage {
    pub name: String,
    pub passed: bool,
    pub details: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Example45Report {
    pub schema_version: String,
    pub n: u32,
    pub m: usize,
    pub blocks: u32,
    pub bases: Vec<u64>,
    pub passed: bool,
    pub failing_stages: Vec<String>,
    pub stages: Vec<Stage>,
}

impl Example45Report {
    pub fn stage(&self, name: &str) -> Option<&Stage> {
        self.stages.iter().find(|s| s.name == name)
    }
}

/// `|w|²` samples `j/20` for `j < 20`, then `99/100`.
pub fn bound_radii() -> Vec<Rational> {
    let mut t: Vec<Rational> = (0..20).map(|j| Rational::from((j, 20))).collect();
    t.push(Rational::from((99, 100)));
    t
}

/// `K̃(w,w)(1-|w|²)^n = 1 + Σ (ρ̃-ρ)(α) x^α (1-t)^n`, exactly, for squared
/// moduli `x`.
pub fn normalized_kernel(w: &WeightFunction, n: u32, x: &[Rational]) -> Result<Rational> {
    let t: Rational = x.iter().sum();
    let damp = (Rational::from(1) - &t).pow(n);
    let mut v = Rational::from(1);
    for (alpha, delta) in w.corrections()? {
        let mut term = delta;
        for (xi, &a) in x.iter().zip(alpha.entries()) {
            if a > 0 {
                term *= Rational::from(xi.pow(a));
            }
        }
        v += term * &damp;
    }
    Ok(v)
}

fn perturbation(w: &WeightFunction) -> &RayPerturbation {
    match w.kind() {
        WeightKind::RayPerturbed(p) => p,
        _ => unreachable!("built as a ray-perturbed weight"),
    }
}

fn stage_product_bound(w: &WeightFunction, opts: &Example45Options) -> Result<Stage> {
    let lo = Rational::from((7, 8));
    let hi = Rational::from((9, 8));
    let splits: Vec<Rational> = (0..=20).map(|j| Rational::from((j, 20))).collect();
    let mut min: Option<(Rational, String, String)> = None;
    let mut max: Option<(Rational, String, String)> = None;
    let mut passed = true;
    let base = WeightFunction::power(opts.m, opts.n)?;
    let series = MetricSeries::new(&base, opts.bound_eval_degree, opts.psh.prec)?;
    let mut series_dev: f64 = 0.0;
    for t in bound_radii() {
        // the power kernel part is exactly 1; confirm with the series
        let tf = rug::Float::with_val(opts.psh.prec, &t);
        let mut x0 = vec![rug::Float::with_val(opts.psh.prec, 0); opts.m];
        x0[0] = tf.clone();
        let h = series.value_at_moduli(&x0)?;
        let one_minus = rug::Float::with_val(opts.psh.prec, 1) - &tf;
        let normalized = h.value * one_minus.pow(opts.n);
        series_dev = series_dev.max((normalized - 1u32).to_f64().abs());
        for s in &splits {
            let mut x = vec![Rational::new(); opts.m];
            x[0] = Rational::from(s * &t);
            x[1] = Rational::from(&t - &x[0]);
            let v = normalized_kernel(w, opts.n, &x)?;
            if !(v > lo && v < hi) {
                passed = false;
            }
            let at = (t.to_string(), s.to_string());
            if min.as_ref().is_none_or(|m| v < m.0) {
                min = Some((v.clone(), at.0.clone(), at.1.clone()));
            }
            if max.as_ref().is_none_or(|m| v > m.0) {
                max = Some((v, at.0, at.1));
            }
        }
    }
    let (vmin, tmin, smin) = min.expect("grid is not empty");
    let (vmax, tmax, smax) = max.expect("grid is not empty");
    let margin = (Rational::from(&vmin - &lo).to_f64()).min(Rational::from(&hi - &vmax).to_f64());
    Ok(Stage {
        name: "product_bound".into(),
        passed,
        details: json!({
            "interval": ["7/8", "9/8"],
            "samples": bound_radii().len() * splits.len(),
            "min": vmin.to_f64(),
            "one_minus_min": (Rational::from(1) - &vmin).to_f64(),
            "min_at": {"t": tmin, "split": smin},
            "max": vmax.to_f64(),
            "max_at": {"t": tmax, "split": smax},
            "margin": margin,
            "power_series_max_deviation": series_dev,
        }),
    })
}

fn stage_necessary(w: &WeightFunction, opts: &Example45Options) -> Result<Stage> {
    let p = perturbation(w);
    let alpha = p.base_point(opts.m, opts.blocks).shifted(0, opts.blocks);
    let check = necessary_condition(w, u64::from(opts.n), &alpha)?;
    Ok(Stage {
        name: "necessary_condition".into(),
        passed: !check.holds,
        details: json!({ "witness": serde_json::to_value(&check).map_err(|e| Error::Inconsistent(e.to_string()))? }),
    })
}

fn stage_ray_ratio(w: &WeightFunction, opts: &Example45Options) -> Result<Stage> {
    let base = WeightFunction::power(opts.m, opts.n)?;
    let p = perturbation(w);
    let mut witnesses = Vec::new();
    let mut passed = true;
    for l in 1..=opts.blocks {
        let alpha = p.base_point(opts.m, l);
        let v = ray_ratio_sq(w, &base, &alpha, 0, l - 1)?;
        passed &= v == l;
        witnesses.push(json!({
            "block": l,
            "alpha": alpha,
            "direction": 1,
            "length": l - 1,
            "ratio_sq": v.to_string(),
        }));
    }
    Ok(Stage {
        name: "ray_ratio".into(),
        passed,
        details: json!({ "witnesses": witnesses }),
    })
}

fn stage_hyper(w: &WeightFunction, opts: &Example45Options) -> Result<Stage> {
    let p = perturbation(w);
    let degree = p.bases[opts.blocks as usize - 1] + 2 * u64::from(opts.blocks) - 1;
    let rep = is_n_hyper_up_to(w, u64::from(opts.n), degree as u32)?;
    Ok(Stage {
        name: "hypercontraction_scan".into(),
        passed: rep.is_violation(),
        details: serde_json::to_value(&rep).map_err(|e| Error::Inconsistent(e.to_string()))?,
    })
}

fn stage_psh(w: &WeightFunction, opts: &Example45Options) -> Result<Stage> {
    let base = WeightFunction::power(opts.m, opts.n)?;
    let grid = opts.grid.points(opts.m);
    let rep = psh_boundedness_report(w, &base, &grid, &opts.psh)?;
    let bounded = rep.min_psi.is_finite() && rep.max_psi.is_finite() && !rep.unbounded_trend;
    Ok(Stage {
        name: "psh_boundedness".into(),
        passed: bounded,
        details: json!({
            "eval_degree": opts.psh.eval_degree,
            "precision_bits": opts.psh.prec,
            "grid": format!("radial:{}x{}", opts.grid.steps, opts.grid.angles),
            "report": serde_json::to_value(&rep).map_err(|e| Error::Inconsistent(e.to_string()))?,
        }),
    })
}

/// Runs every stage; a stage that errors counts as failed and records the
/// error message.
pub fn run_example45(opts: &Example45Options) -> Result<Example45Report> {
    if opts.n < 2 || opts.m < 2 || opts.blocks < 2 {
        return Err(Error::InvalidArgument(
            "the example needs n >= 2, m >= 2 and L >= 2".into(),
        ));
    }
    let w = WeightFunction::ray_perturbed(opts.n, opts.m, opts.blocks)?;
    type StageFn = fn(&WeightFunction, &Example45Options) -> Result<Stage>;
    let runners: [(&str, StageFn); 5] = [
        ("product_bound", stage_product_bound),
        ("necessary_condition", stage_necessary),
        ("ray_ratio", stage_ray_ratio),
        ("hypercontraction_scan", stage_hyper),
        ("psh_boundedness", stage_psh),
    ];
    let stages: Vec<Stage> = runners
        .iter()
        .map(|(name, f)| {
            f(&w, opts).unwrap_or_else(|e| Stage {
                name: (*name).into(),
                passed: false,
                details: json!({ "error": e.to_string() }),
            })
        })
        .collect();
    let failing_stages: Vec<String> = stages
        .iter()
        .filter(|s| !s.passed)
        .map(|s| s.name.clone())
        .collect();
    Ok(Example45Report {
        schema_version: SCHEMA_VERSION.into(),
        n: opts.n,
        m: opts.m,
        blocks: opts.blocks,
        bases: perturbation(&w).bases.clone(),
        passed: failing_stages.is_empty(),
        failing_stages,
        stages,
    })
}
