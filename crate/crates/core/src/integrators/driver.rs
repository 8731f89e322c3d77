use super::{Ledger, StepResult, Stepper};
use crate::error::{Error, Result};
use crate::numerics::{NewtonConfig, Vector};

/// Where the input signal is sampled on each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputSampling {
    /// `u(t_k + h/2)`.
    Midpoint,
    /// `u(t_k)`.
    Left,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions {
    pub newton: NewtonConfig,
    pub sampling: InputSampling,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            newton: NewtonConfig::default(),
            sampling: InputSampling::Midpoint,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub scheme: String,
    pub model: String,
    pub h: f64,
    pub newton_tol: f64,
    pub sampling: InputSampling,
}

/// States on the uniform grid `t_k = k h` plus one result per step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    pub steps: Vec<StepResult>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn final_state(&self) -> &Vector {
        self.states.last().expect("trajectory holds the initial state")
    }
}

#[derive(Debug, thiserror::Error)]
#[error("step {step} failed: {error}")]
pub struct IntegrationFailure {
    pub step: usize,
    #[source]
    pub error: Error,
    pub partial: Trajectory,
}

/// Number of steps `N = round(t_end / h)`, rejecting grids that do not fit.
pub fn step_count(t_end: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!("step size must be positive, got {h}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Config(format!("t_end must be positive, got {t_end}")));
    }
    let n = (t_end / h).round();
    if n < 1.0 {
        return Err(Error::Config(format!("t_end={t_end} is shorter than one step h={h}")));
    }
    if (n * h - t_end).abs() > 1e-9 * t_end.max(h) {
        return Err(Error::Config(format!("h={h} does not divide t_end={t_end}")));
    }
    Ok(n as usize)
}

pub fn integrate(
    stepper: &dyn Stepper,
    x0: &Vector,
    input: &(dyn Fn(usize, f64) -> Vector + Sync),
    t_end: f64,
    h: f64,
    opts: &IntegrateOptions,
) -> std::result::Result<Trajectory, IntegrationFailure> {
    let meta = TrajectoryMeta {
        scheme: stepper.scheme().to_string(),
        model: stepper.model_name().to_string(),
        h,
        newton_tol: opts.newton.tol,
        sampling: opts.sampling,
    };
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x0.clone()],
        steps: Vec::new(),
        meta,
    };
    let fail = |step, error, partial| IntegrationFailure { step, error, partial };

    let n = match step_count(t_end, h).and_then(|n| opts.newton.validate().map(|_| n)) {
        Ok(n) => n,
        Err(e) => return Err(fail(0, e, traj)),
    };
    if let Err(e) = stepper.check_domain(x0) {
        return Err(fail(0, e, traj));
    }

    let mut x = x0.clone();
    for k in 0..n {
        let t = k as f64 * h;
        let ts = match opts.sampling {
            InputSampling::Midpoint => t + 0.5 * h,
            InputSampling::Left => t,
        };
        let u = input(k, ts);
        match stepper.step(&x, &u, h, &opts.newton) {
            Ok(res) => {
                x = res.x_next.clone();
                traj.times.push((k + 1) as f64 * h);
                traj.states.push(x.clone());
                traj.steps.push(res);
            }
            Err(e) => return Err(fail(k, e, traj)),
        }
    }
    Ok(traj)
}

/// Recompute the ledger of every step from the stored states and co-states.
pub fn power_balance_series(traj: &Trajectory, stepper: &dyn Stepper) -> Result<Vec<Ledger>> {
    traj.steps
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let (xk, xp) = (&traj.states[k], &traj.states[k + 1]);
            let (r, b) = stepper.ledger_matrices(xk, xp)?;
            let dh = stepper.hamiltonian(xp) - stepper.hamiltonian(xk);
            Ok(Ledger::from_parts(dh, traj.meta.h, &s.costate, &r, &b, &s.u).0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_count_rules() {
        assert_eq!(step_count(10.0, 0.01).unwrap(), 1000);
        assert_eq!(step_count(0.1, 0.0025).unwrap(), 40);
        assert!(step_count(0.05, 0.1).is_err());
        assert!(step_count(1.0, 0.3).is_err());
        assert!(step_count(1.0, 0.0).is_err());
        assert!(step_count(-1.0, 0.1).is_err());
    }
}
