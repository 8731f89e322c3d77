use std::path::Path;

use serde::{Deserialize, Serialize};

use phdae_core::calculus::discrete_gradient;
use phdae_core::integrators::{
    integrate, sample_mat, ApproxMode, ConsistentApprox, DdrStepper, DgpStepper, MidpointStepper,
    SedgStepper, Stepper, Trajectory,
};
use phdae_core::library::ShippedModel;
use phdae_core::models::to_ddr;
use phdae_core::{Error, Result};

use crate::config::{RunConfig, Scheme};
use crate::output::{self, TrajectoryRow};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Replace coefficient approximations named in the config.
fn apply_coefficient_modes(
    mut approx: ConsistentApprox,
    cfg: &RunConfig,
    model: &ShippedModel,
    scheme: Scheme,
) -> Result<ConsistentApprox> {
    for (name, mode) in &cfg.coefficients {
        let mode = ApproxMode::parse(mode)?;
        let f = match name.as_str() {
            "E" => match (scheme, model.semi_explicit()) {
                (Scheme::Sedg, Some(se)) => se.e11.clone(),
                _ => model.system.e.clone(),
            },
            "J" => model.system.j.clone(),
            "R" => model.system.r.clone(),
            "B" => model.system.b.clone(),
            other => return Err(Error::Config(format!("unknown coefficient '{other}'"))),
        };
        approx = approx.with_matrix(name, sample_mat(f, mode), mode)?;
    }
    Ok(approx)
}

pub fn build_stepper(cfg: &RunConfig, model: &ShippedModel) -> Result<Box<dyn Stepper>> {
    let kind = cfg.discrete_gradient.kind();
    Ok(match cfg.scheme {
        Scheme::Sedg => {
            let se = model.semi_explicit().ok_or_else(|| {
                Error::Config(format!("scheme 'sedg' requires a semi-explicit model; '{}' is not", model.name))
            })?;
            let approx = model.sedg_approx().expect("semi-explicit models provide an approximation");
            let approx = apply_coefficient_modes(approx, cfg, model, Scheme::Sedg)?;
            Box::new(SedgStepper::new(se.clone(), discrete_gradient(&se.h1, kind), approx)?)
        }
        Scheme::Dgp => {
            let approx = apply_coefficient_modes(model.approx(ApproxMode::Midpoint), cfg, model, Scheme::Dgp)?;
            Box::new(DgpStepper::new(model.system.clone(), model.pair(kind)?, approx)?)
        }
        Scheme::Ddr => {
            let approx = apply_coefficient_modes(model.approx(ApproxMode::Midpoint), cfg, model, Scheme::Ddr)?;
            Box::new(DdrStepper::new(
                to_ddr(&model.system),
                discrete_gradient(&model.system.hamiltonian, kind),
                approx,
                cfg.completion.completion(),
            )?)
        }
        Scheme::Midpoint => Box::new(MidpointStepper { sys: model.system.clone() }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonStats {
    pub total_iterations: usize,
    pub max_iterations: usize,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub toolkit_version: String,
    pub model: String,
    pub scheme: String,
    pub h: f64,
    pub t_end: f64,
    pub steps_requested: usize,
    pub steps_completed: usize,
    pub converged: bool,
    pub failure: Option<String>,
    pub h_initial: f64,
    pub h_final: f64,
    pub max_abs_balance_residual: f64,
    pub max_dh: f64,
    /// Largest positive energy increment, 0 if none.
    pub max_dh_positive: f64,
    /// `max |balance_residual| ≤ balance_tolerance`.
    pub energy_consistent: bool,
    pub balance_tolerance: f64,
    pub max_g_pos: Option<f64>,
    pub max_g_vel: Option<f64>,
    pub newton: NewtonStats,
}

/// Relative tolerance of the energy-consistency flag, in units of the
/// Newton tolerance.
pub const BALANCE_TOL_FACTOR: f64 = 10.0;

#[derive(Debug)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub rows: Vec<TrajectoryRow>,
    pub summary: Summary,
    pub error: Option<Error>,
}

pub fn trajectory_rows(traj: &Trajectory, stepper: &dyn Stepper, model: &ShippedModel) -> Vec<TrajectoryRow> {
    traj.steps
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let x = &traj.states[k + 1];
            let constraints = model.constraint_violation(x);
            TrajectoryRow {
                t: traj.times[k + 1],
                x: x.iter().cloned().collect(),
                h: stepper.hamiltonian(x),
                dh: s.ledger.dh,
                w_diss: s.ledger.dissipated,
                supplied: s.ledger.supplied,
                balance_residual: s.ledger.balance_residual,
                g_pos: constraints.map(|c| c.0),
                g_vel: constraints.map(|c| c.1),
                newton_iters: s.newton.iterations,
            }
        })
        .collect()
}

pub fn summarize(
    cfg: &RunConfig,
    model: &ShippedModel,
    h0: f64,
    rows: &[TrajectoryRow],
    steps_requested: usize,
    error: Option<&Error>,
    failed_step: Option<usize>,
) -> Summary {
    let maxf = |f: &dyn Fn(&TrajectoryRow) -> f64| rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let max_abs_bal = rows.iter().map(|r| r.balance_residual.abs()).fold(0.0, f64::max);
    let max_dh = maxf(&|r| r.dh);
    let tol = BALANCE_TOL_FACTOR * cfg.newton.tol;
    let total: usize = rows.iter().map(|r| r.newton_iters).sum();
    let constrained = model.is_constrained();
    Summary {
        toolkit_version: VERSION.to_string(),
        model: model.name.to_string(),
        scheme: cfg.scheme.as_str().to_string(),
        h: cfg.h,
        t_end: cfg.t_end,
        steps_requested,
        steps_completed: rows.len(),
        converged: error.is_none(),
        failure: error.map(|e| match failed_step {
            Some(k) => format!("step {k}: {e}"),
            None => e.to_string(),
        }),
        h_initial: h0,
        h_final: rows.last().map_or(h0, |r| r.h),
        max_abs_balance_residual: max_abs_bal,
        max_dh: if rows.is_empty() { 0.0 } else { max_dh },
        max_dh_positive: max_dh.max(0.0),
        energy_consistent: max_abs_bal <= tol,
        balance_tolerance: tol,
        max_g_pos: constrained.then(|| rows.iter().filter_map(|r| r.g_pos).fold(0.0, f64::max)),
        max_g_vel: constrained.then(|| rows.iter().filter_map(|r| r.g_vel).fold(0.0, f64::max)),
        newton: NewtonStats {
            total_iterations: total,
            max_iterations: rows.iter().map(|r| r.newton_iters).max().unwrap_or(0),
            mean_iterations: if rows.is_empty() { 0.0 } else { total as f64 / rows.len() as f64 },
        },
    }
}

/// Integrate per the config. `Err` only for configuration problems; a
/// failed integration is reported inside the outcome.
pub fn simulate(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let model = cfg.build_model()?;
    let stepper = build_stepper(cfg, &model)?;
    let x0 = cfg.initial_state(&model)?;
    model.system.check_domain(&x0)?;
    let n = phdae_core::integrators::step_count(cfg.t_end, cfg.h)?;
    let input = cfg.input_signal(model.system.m)?;
    let (trajectory, error, failed_step) =
        match integrate(stepper.as_ref(), &x0, &input, cfg.t_end, cfg.h, &cfg.integrate_options()) {
            Ok(t) => (t, None, None),
            Err(f) => (f.partial, Some(f.error), Some(f.step)),
        };
    let rows = trajectory_rows(&trajectory, stepper.as_ref(), &model);
    let summary = summarize(cfg, &model, stepper.hamiltonian(&x0), &rows, n, error.as_ref(), failed_step);
    Ok(RunOutcome {
        trajectory,
        rows,
        summary,
        error,
    })
}

/// Run and write `trajectory.csv`, `summary.json`, `config.echo` into `dir`.
pub fn run(cfg: &RunConfig, dir: &Path) -> Result<RunOutcome> {
    let outcome = simulate(cfg)?;
    let constrained = outcome.summary.max_g_pos.is_some();
    let n = outcome.trajectory.states[0].len();
    output::write_run(dir, cfg, n, constrained, &outcome.rows, &outcome.summary)?;
    Ok(outcome)
}
