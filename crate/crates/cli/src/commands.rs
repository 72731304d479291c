use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rug::{Float, Rational};
use serde_json::{json, Value};
use wshift_core::counterexample::{run_example45, Example45Options};
use wshift_core::curvature::{psh_points, summarize_psh, PshOptions};
use wshift_core::hypercontraction::{
    defect_minimum_below, is_n_hyper_up_to, necessary_condition, subnormality_obstruction,
    DefectDiagonal,
};
use wshift_core::multiindex::{
    enumerate_leq_degree, verify_alternating_sum, verify_convolution_identities,
    verify_vandermonde,
};
use wshift_core::report::{sci17, SCHEMA_VERSION};
use wshift_core::similarity::{ray_rows, similarity_scan_with, ScanVerdict};
use wshift_core::truncation::build_truncated;
use wshift_core::weights::MetricSeries;
use wshift_core::{WeightFunction, WeightSpec};

use crate::output::Report;
use crate::{Format, NumericArgs};

fn load_weight(path: &Path) -> anyhow::Result<WeightFunction> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading weight spec {}", path.display()))?;
    let spec = WeightSpec::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    spec.build().with_context(|| format!("building weight from {}", path.display()))
}

fn to_value<T: serde::Serialize>(v: &T) -> anyhow::Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn header(command: &str) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(command));
    m
}

fn rat_cells(v: &Rational) -> [String; 2] {
    [v.to_string(), sci17(v.to_f64())]
}

pub fn verify_identities(n_max: u64, beta_max: u32) -> anyhow::Result<Report> {
    let mut rows = Vec::new();
    let mut first_failure: Option<Value> = None;
    let mut record = |identity: &str, params: String, holds: bool, rows: &mut Vec<Vec<String>>| {
        if !holds && first_failure.is_none() {
            first_failure = Some(json!({ "identity": identity, "parameters": params }));
        }
        rows.push(vec![identity.to_string(), params, holds.to_string()]);
    };
    for m in 1..=4 {
        for beta in enumerate_leq_degree(m, beta_max) {
            for i in 0..=beta.degree() {
                let holds = verify_vandermonde(&beta, i)?;
                record("vandermonde", format!("beta={beta} i={i}"), holds, &mut rows);
            }
        }
    }
    for n in 2..=n_max {
        for j in 2..=3 * n {
            let holds = verify_convolution_identities(n, j)?;
            record("convolution", format!("n={n} j={j}"), holds, &mut rows);
        }
    }
    for n in 1..=n_max.max(1) {
        for top in 0..=n {
            let holds = verify_alternating_sum(n, top);
            record("alternating_sum", format!("n={n} top={top}"), holds, &mut rows);
        }
    }
    let mut families = Vec::new();
    for name in ["vandermonde", "convolution", "alternating_sum"] {
        let cases = rows.iter().filter(|r| r[0] == name).count();
        let failures = rows.iter().filter(|r| r[0] == name && r[2] == "false").count();
        families.push(json!({ "identity": name, "cases": cases, "failures": failures }));
    }
    let mut j = header("verify-identities");
    j.insert("n_max".into(), json!(n_max));
    j.insert("beta_max".into(), json!(beta_max));
    j.insert("families".into(), json!(families));
    let finding = first_failure.as_ref().map(|f| format!("identity failed: {f}"));
    if let Some(f) = first_failure {
        j.insert("witness".into(), f);
    }
    let mut rep = Report::new(Value::Object(j), vec!["identity", "parameters", "holds"], rows);
    rep.finding = finding;
    Ok(rep)
}

pub fn check_hyper(path: &Path, n: u64, degree: u32, format: Format) -> anyhow::Result<Report> {
    let w = load_weight(path)?;
    let rep = is_n_hyper_up_to(&w, n, degree)?;
    let mut rows = Vec::new();
    if format == Format::Csv {
        for k in 1..=n {
            for (alpha, v) in DefectDiagonal::compute(&w, k, degree)?.entries {
                let [exact, approx] = rat_cells(&v);
                rows.push(vec![k.to_string(), alpha.degree().to_string(), alpha.to_string(), exact, approx]);
            }
        }
    }
    let mut j = header("check-hyper");
    let Value::Object(body) = to_value(&rep)? else { unreachable!("struct serializes to an object") };
    j.extend(body);
    let mut out = Report::new(Value::Object(j), vec!["k", "degree", "alpha", "defect", "defect_f64"], rows);
    if rep.is_violation() {
        out.finding = Some(rep.summary.clone());
    }
    Ok(out)
}

pub fn necessary(path: &Path, n: u64, degree: u32) -> anyhow::Result<Report> {
    let w = load_weight(path)?;
    let mut rows = Vec::new();
    let mut violations = 0usize;
    let mut first = None;
    let indices: Vec<_> = enumerate_leq_degree(w.dim(), degree)
        .into_iter()
        .filter(|a| !a.is_zero())
        .collect();
    for alpha in &indices {
        let c = necessary_condition(&w, n, alpha)?;
        if !c.holds {
            violations += 1;
            if first.is_none() {
                first = Some(c.clone());
            }
        }
        let [lhs, lhs_f] = rat_cells(&c.lhs);
        rows.push(vec![alpha.degree().to_string(), alpha.to_string(), lhs, lhs_f, c.rhs.to_string(), c.holds.to_string()]);
    }
    let mut j = header("necessary");
    j.insert("n".into(), json!(n));
    j.insert("degree".into(), json!(degree));
    j.insert("checked".into(), json!(indices.len()));
    j.insert("violations".into(), json!(violations));
    let finding = match first {
        Some(c) => {
            let (below, value) = defect_minimum_below(&w, n, &c.alpha)?;
            let order = subnormality_obstruction(&w, &c.alpha)?;
            let summary = format!("necessary condition fails at {}: {} > {}", c.alpha, c.lhs, c.rhs);
            j.insert("verdict".into(), json!("violation"));
            j.insert("summary".into(), json!(summary));
            j.insert(
                "witness".into(),
                json!({
                    "check": to_value(&c)?,
                    "obstruction_order": order,
                    "defect_minimum_below": { "alpha": below, "value": value.to_string() },
                }),
            );
            Some(summary)
        }
        None => {
            j.insert("verdict".into(), json!("no-violation-up-to"));
            j.insert(
                "summary".into(),
                json!(format!("condition holds for 0 < |alpha| <= {degree} (not a proof)")),
            );
            None
        }
    };
    let mut out = Report::new(Value::Object(j), vec!["degree", "alpha", "lhs", "lhs_f64", "rhs", "holds"], rows);
    out.finding = finding;
    Ok(out)
}

pub fn similarity(
    paths: &[PathBuf],
    degree: u32,
    ray_length: u32,
    growth_factor: f64,
    format: Format,
) -> anyhow::Result<Report> {
    let [p1, p2] = paths else { bail!("similarity-scan needs exactly two --weights files") };
    let w1 = load_weight(p1)?;
    let w2 = load_weight(p2)?;
    let rep = similarity_scan_with(&w1, &w2, degree, ray_length, growth_factor)?;
    let mut rows = Vec::new();
    if format == Format::Csv {
        for r in ray_rows(&w1, &w2, degree, ray_length)? {
            let [exact, approx] = rat_cells(&r.ratio_sq);
            rows.push(vec![r.degree.to_string(), r.direction.to_string(), r.length.to_string(), exact, approx]);
        }
    }
    let mut j = header("similarity-scan");
    let Value::Object(body) = to_value(&rep)? else { unreachable!("struct serializes to an object") };
    j.extend(body);
    let mut finding = None;
    if rep.verdict == ScanVerdict::GrowthFlagged {
        let msg = format!("ratio spread grows from {} to {} between L/2 and L", rep.half_spread, rep.spread);
        j.insert(
            "witness".into(),
            json!({ "max_ray": to_value(&rep.argmax)?, "min_ray": to_value(&rep.argmin)?, "spread": rep.spread.to_string() }),
        );
        finding = Some(msg);
    }
    let mut out = Report::new(Value::Object(j), vec!["degree", "direction", "length", "ratio_sq", "ratio_sq_f64"], rows);
    out.finding = finding;
    Ok(out)
}

fn psh_options(numeric: &NumericArgs) -> PshOptions {
    PshOptions {
        eval_degree: numeric.eval_degree,
        prec: numeric.precision_bits,
        tol: numeric.tol,
        ..PshOptions::default()
    }
}

fn curvature_row(radius: f64, w: &[num_complex::Complex64], psi: f64, eig: &[f64], tail: f64) -> Vec<String> {
    let mut row = vec![sci17(radius)];
    row.extend(w.iter().flat_map(|z| [sci17(z.re), sci17(z.im)]));
    row.extend([
        sci17(psi),
        sci17(eig.first().copied().unwrap_or(f64::NAN)),
        sci17(eig.last().copied().unwrap_or(f64::NAN)),
        sci17(tail),
    ]);
    row
}

pub fn curvature(paths: &[PathBuf], numeric: &NumericArgs) -> anyhow::Result<Report> {
    let opts = psh_options(numeric);
    let mut j = header("curvature");
    j.insert("grid".into(), json!(format!("radial:{}x{}", numeric.grid.steps, numeric.grid.angles)));
    j.insert("eval_degree".into(), json!(numeric.eval_degree));
    j.insert("precision_bits".into(), json!(numeric.precision_bits));
    let mut rows = Vec::new();
    let mut finding = None;
    let dim;
    match paths {
        [p] => {
            // log h of a single kernel; psi = log h
            let w = load_weight(p)?;
            dim = w.dim();
            let grid = numeric.grid.points(dim);
            let series = MetricSeries::new(&w, numeric.eval_degree, numeric.precision_bits)?;
            let mut points = Vec::new();
            for gp in &grid {
                let h = series.value_at(&gp.w)?;
                let psi = Float::with_val(numeric.precision_bits, h.value.ln_ref()).to_f64();
                let hess = series.log_hessian(&gp.w)?;
                let eig = hess.eigenvalues();
                rows.push(curvature_row(gp.radius, &gp.w, psi, &eig, hess.tail_error));
                points.push(json!({ "radius": gp.radius, "psi": psi, "hessian": to_value(&hess)?, "eigenvalues": eig }));
            }
            j.insert("points".into(), json!(points));
        }
        [p1, p2] => {
            let w1 = load_weight(p1)?;
            let w2 = load_weight(p2)?;
            dim = w1.dim();
            let grid = numeric.grid.points(dim);
            let pts = psh_points(&w1, &w2, &grid, &opts)?;
            let summary = summarize_psh(&pts, &opts)?;
            for p in &pts {
                rows.push(curvature_row(p.radius, &p.w, p.psi, &p.eigenvalues, p.hessian.tail_error));
            }
            j.insert("points".into(), to_value(&pts)?);
            j.insert("summary".into(), to_value(&summary)?);
            if !summary.psd_on_grid {
                let p = &pts[summary.argmin_eigenvalue];
                j.insert(
                    "witness".into(),
                    json!({ "point": summary.argmin_eigenvalue, "radius": p.radius, "min_eigenvalue": summary.min_eigenvalue }),
                );
                finding = Some(format!(
                    "log(h1/h2) is not plurisubharmonic at grid point {}: eigenvalue {}",
                    summary.argmin_eigenvalue, summary.min_eigenvalue
                ));
            }
        }
        _ => bail!("curvature takes one or two --weights files"),
    }
    let mut csv_header = vec!["radius".to_string()];
    csv_header.extend((1..=dim).flat_map(|k| [format!("w{k}_re"), format!("w{k}_im")]));
    csv_header.extend(["psi", "min_eigenvalue", "max_eigenvalue", "tail_error"].map(String::from));
    let mut out = Report::new(Value::Object(j), csv_header, rows);
    out.finding = finding;
    Ok(out)
}

pub fn truncate(path: &Path, n: u64, degree: u32) -> anyhow::Result<Report> {
    let w = load_weight(path)?;
    let tt = build_truncated(&w, degree)?;
    let commutators: Vec<Value> = tt
        .commutator_defects()
        .iter()
        .map(|&(i, j, count)| {
            json!({ "i": i + 1, "j": j + 1, "nonzero_entries": count, "exact_zero": count == 0 })
        })
        .collect();
    let mut summaries = Vec::new();
    let mut witness = None;
    for k in 1..=n {
        let s = tt.summary(k, true)?;
        if s.defect_min < 0 && witness.is_none() {
            witness = Some(json!({ "k": k, "alpha": s.defect_argmin, "value": s.defect_min.to_string() }));
        }
        summaries.push(to_value(&s)?);
    }
    // decay curves M^k(I) at every basis vector, k = 0..=D+1
    let curves: Vec<Vec<Rational>> = (0..=u64::from(degree) + 1)
        .map(|k| tt.m_power_diag(k))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for (p, alpha) in tt.basis().iter().enumerate() {
        for (k, diag) in curves.iter().enumerate() {
            let [exact, approx] = rat_cells(&diag[p]);
            rows.push(vec![alpha.to_string(), k.to_string(), exact, approx]);
        }
    }
    let mut j = header("truncate");
    j.insert("degree".into(), json!(degree));
    j.insert("m".into(), json!(tt.m()));
    j.insert("dim".into(), json!(tt.dim()));
    j.insert("commutators".into(), json!(commutators));
    j.insert("defects".into(), json!(summaries));
    let finding = witness.as_ref().map(|wit| format!("negative defect diagonal entry: {wit}"));
    if let Some(wit) = witness {
        j.insert("witness".into(), wit);
    }
    let mut out = Report::new(Value::Object(j), vec!["alpha", "k", "m_power_diag", "m_power_diag_f64"], rows);
    out.finding = finding;
    Ok(out)
}

pub fn example45(n: u32, m: usize, blocks: u32, numeric: &NumericArgs) -> anyhow::Result<Report> {
    let opts = Example45Options {
        n,
        m,
        blocks,
        grid: numeric.grid.clone(),
        psh: psh_options(numeric),
        ..Example45Options::default()
    };
    let rep = run_example45(&opts)?;
    let rows = rep
        .stages
        .iter()
        .map(|s| vec![s.name.clone(), s.passed.to_string()])
        .collect();
    let mut out = Report::new(to_value(&rep)?, vec!["stage", "passed"], rows);
    out.exit_one = Some(!rep.passed);
    if !rep.passed {
        out.finding = Some(format!("failing stages: {}", rep.failing_stages.join(", ")));
    }
    Ok(out)
}
