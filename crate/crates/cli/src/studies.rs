//! Convergence and robustness studies. Sub-runs execute in parallel; results
//! are reported sorted by scheme and step size.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use phdae_core::integrators::step_count;
use phdae_core::library::linear_index1_exact;
use phdae_core::numerics::Vector;
use phdae_core::{Error, Result};

use crate::config::{RunConfig, Scheme};
use crate::output::{fmt_f64, write_file, write_json};
use crate::runner::simulate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub h: f64,
    /// Relative error per observable; NaN when the run failed.
    pub errors: BTreeMap<String, f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub model: String,
    pub scheme: String,
    pub probe_time: f64,
    pub reference: String,
    pub reference_h: f64,
    pub observables: Vec<String>,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log e` against `log h`; `None` with fewer than
    /// two usable points.
    pub slopes: BTreeMap<String, Option<f64>>,
}

/// Least-squares slope through `(ln h, ln e)` over finite positive errors.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(h, e)| *h > 0.0 && *e > 0.0 && e.is_finite())
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn final_state(cfg: &RunConfig) -> std::result::Result<Vector, String> {
    let out = simulate(cfg).map_err(|e| e.to_string())?;
    match out.error {
        Some(e) => Err(format!("{e} (after {} steps)", out.rows.len())),
        None => Ok(out.trajectory.final_state().clone()),
    }
}

fn relative_error(reference: &Vector, x: &Vector) -> f64 {
    let denom = reference.norm();
    let num = (reference - x).norm();
    if denom > 0.0 {
        num / denom
    } else {
        num
    }
}

pub fn run_convergence(cfg: &RunConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let c = &cfg.convergence;
    if c.h_list.is_empty() {
        return Err(Error::Config("convergence.h_list is empty".into()));
    }
    let exact = match c.reference.as_str() {
        "scheme" => false,
        "exact" if cfg.model.name == "linear_index1" => true,
        "exact" => {
            return Err(Error::Config(format!(
                "model '{}' has no closed-form reference",
                cfg.model.name
            )))
        }
        other => return Err(Error::Config(format!("unknown convergence reference '{other}'"))),
    };
    let h_min = c.h_list.iter().cloned().fold(f64::INFINITY, f64::min);
    if !exact && !(c.reference_h > 0.0 && c.reference_h < h_min) {
        return Err(Error::Config(format!(
            "reference_h={} must be positive and below min(h_list)={h_min}",
            c.reference_h
        )));
    }
    for &h in c.h_list.iter().chain((!exact).then_some(&c.reference_h)) {
        step_count(c.probe_time, h)?;
    }
    let model = cfg.build_model()?;
    let x0 = cfg.initial_state(&model)?;
    for o in &c.observables {
        model.observable(o, &x0)?;
    }

    let with_h = |h: f64| {
        let mut sub = cfg.clone();
        sub.h = h;
        sub.t_end = c.probe_time;
        sub
    };
    let mut jobs: Vec<Option<f64>> = c.h_list.iter().map(|&h| Some(h)).collect();
    if !exact {
        jobs.push(None);
    }
    let mut results: Vec<(Option<f64>, std::result::Result<Vector, String>)> = jobs
        .par_iter()
        .map(|job| {
            let h = job.unwrap_or(c.reference_h);
            (*job, final_state(&with_h(h)))
        })
        .collect();

    let reference = if exact {
        Ok(linear_index1_exact(x0[0], c.probe_time))
    } else {
        results.pop().expect("reference job").1
    };
    let reference = reference.map_err(|e| Error::Config(format!("reference run failed: {e}")))?;

    let mut rows: Vec<ConvergenceRow> = results
        .into_iter()
        .map(|(h, res)| {
            let h = h.expect("study job");
            match res {
                Ok(x) => ConvergenceRow {
                    h,
                    errors: c
                        .observables
                        .iter()
                        .map(|o| {
                            let r = model.observable(o, &reference).expect("checked above");
                            let v = model.observable(o, &x).expect("checked above");
                            (o.clone(), relative_error(&r, &v))
                        })
                        .collect(),
                    failure: None,
                },
                Err(e) => ConvergenceRow {
                    h,
                    errors: c.observables.iter().map(|o| (o.clone(), f64::NAN)).collect(),
                    failure: Some(e),
                },
            }
        })
        .collect();
    rows.sort_by(|a, b| b.h.total_cmp(&a.h));

    let slopes = c
        .observables
        .iter()
        .map(|o| {
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, r.errors[o])).collect();
            (o.clone(), loglog_slope(&pts))
        })
        .collect();

    Ok(ConvergenceReport {
        model: model.name.to_string(),
        scheme: cfg.scheme.as_str().to_string(),
        probe_time: c.probe_time,
        reference: c.reference.clone(),
        reference_h: c.reference_h,
        observables: c.observables.clone(),
        rows,
        slopes,
    })
}

pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("h");
    for o in &report.observables {
        let _ = write!(out, ",e_{o}");
    }
    out.push_str(",status\n");
    for r in &report.rows {
        out.push_str(&fmt_f64(r.h));
        for o in &report.observables {
            let _ = write!(out, ",{}", fmt_f64(r.errors[o]));
        }
        out.push_str(if r.failure.is_some() { ",failed\n" } else { ",ok\n" });
    }
    out
}

pub fn write_convergence(dir: &Path, cfg: &RunConfig, report: &ConvergenceReport) -> Result<()> {
    write_file(&dir.join("errors.csv"), &convergence_csv(report))?;
    write_json(&dir.join("summary.json"), report)?;
    write_file(&dir.join("config.echo"), &cfg.to_toml())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub scheme: Scheme,
    pub h: f64,
    pub converged_all_steps: bool,
    pub steps_completed: usize,
    pub steps_requested: usize,
    pub max_dh_positive: f64,
    pub max_balance_residual: f64,
    pub failure: Option<String>,
}

/// Every `(scheme, h)` pair of the config with zero input.
pub fn run_robustness(cfg: &RunConfig) -> Result<Vec<RobustnessRow>> {
    cfg.validate()?;
    let r = &cfg.robustness;
    if r.h_list.is_empty() || r.schemes.is_empty() {
        return Err(Error::Config("robustness needs at least one scheme and step size".into()));
    }
    cfg.build_model()?;
    let jobs: Vec<(Scheme, f64)> = r
        .schemes
        .iter()
        .flat_map(|&s| r.h_list.iter().map(move |&h| (s, h)))
        .collect();
    let mut rows: Vec<RobustnessRow> = jobs
        .par_iter()
        .map(|&(scheme, h)| {
            let mut sub = cfg.clone();
            sub.scheme = scheme;
            sub.h = h;
            sub.input.signal = "zero".into();
            let requested = step_count(sub.t_end, h).unwrap_or(0);
            match simulate(&sub) {
                Ok(out) => RobustnessRow {
                    scheme,
                    h,
                    converged_all_steps: out.error.is_none(),
                    steps_completed: out.rows.len(),
                    steps_requested: requested,
                    max_dh_positive: out.summary.max_dh_positive,
                    max_balance_residual: out.summary.max_abs_balance_residual,
                    failure: out.summary.failure,
                },
                Err(e) => RobustnessRow {
                    scheme,
                    h,
                    converged_all_steps: false,
                    steps_completed: 0,
                    steps_requested: requested,
                    max_dh_positive: f64::NAN,
                    max_balance_residual: f64::NAN,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect();
    rows.sort_by(|a, b| a.scheme.cmp(&b.scheme).then(a.h.total_cmp(&b.h)));
    Ok(rows)
}

pub fn robustness_csv(rows: &[RobustnessRow]) -> String {
    let mut out = String::from(
        "scheme,h,converged_all_steps,steps_completed,steps_requested,max_dH_positive,max_balance_residual\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.scheme.as_str(),
            fmt_f64(r.h),
            r.converged_all_steps,
            r.steps_completed,
            r.steps_requested,
            fmt_f64(r.max_dh_positive),
            fmt_f64(r.max_balance_residual)
        );
    }
    out
}

pub fn write_robustness(dir: &Path, cfg: &RunConfig, rows: &[RobustnessRow]) -> Result<()> {
    write_file(&dir.join("robustness.csv"), &robustness_csv(rows))?;
    write_json(&dir.join("summary.json"), &rows)?;
    write_file(&dir.join("config.echo"), &cfg.to_toml())
}
