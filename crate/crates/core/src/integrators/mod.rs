//! One-step methods and the trajectory driver.
//!
//! Every stepper solves one implicit step with Newton's method and records an
//! energy ledger `ΔH + h z̄ᵀR̄z̄ − h ȳᵀū`, which vanishes up to solver
//! tolerance for the discrete gradient schemes.

mod approx;
mod ddr;
mod dgp;
mod driver;
mod midpoint;
mod sedg;

pub use approx::{
    sample_mat, sample_vec, ApproxMode, ConsistentApprox, DiscreteGradientPair,
    FallibleTwoPointMat, FallibleTwoPointVec, TwoPointVec,
};
pub use ddr::{step_ddr, DdrCompletion, DdrStepper, COLSPACE_REL_TOL};
pub use dgp::{step_dgp, DgpStepper};
pub use driver::{
    integrate, power_balance_series, step_count, InputSampling, IntegrateOptions,
    IntegrationFailure, Trajectory, TrajectoryMeta,
};
pub use midpoint::{step_midpoint, MidpointStepper};
pub use sedg::{step_semi_explicit, SedgStepper};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, NewtonConfig, NewtonReport, Vector};

/// Per-step discrete power balance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ledger {
    pub dh: f64,
    pub dissipated: f64,
    pub supplied: f64,
    pub balance_residual: f64,
}

impl Ledger {
    pub fn new(dh: f64, dissipated: f64, supplied: f64) -> Self {
        Self {
            dh,
            dissipated,
            supplied,
            balance_residual: dh + dissipated - supplied,
        }
    }

    /// Ledger from the co-state and the discrete `R̄`, `B̄` of one step.
    pub fn from_parts(dh: f64, h: f64, costate: &Vector, r_bar: &Matrix, b_bar: &Matrix, u: &Vector) -> (Self, Vector) {
        let y = b_bar.transpose() * costate;
        let dissipated = h * costate.dot(&(r_bar * costate));
        let supplied = h * y.dot(u);
        (Self::new(dh, dissipated, supplied), y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub x_next: Vector,
    /// Full co-state entering the ledger: `z̄` (stacked for the semi-explicit
    /// scheme), `f̄` for DDR, `z(x_mid)` for the midpoint rule.
    pub costate: Vector,
    pub y: Vector,
    pub u: Vector,
    pub newton: NewtonReport,
    pub ledger: Ledger,
}

/// A one-step method bound to its model and discretization choices.
pub trait Stepper: Send + Sync {
    fn scheme(&self) -> &'static str;
    fn model_name(&self) -> &str;
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn hamiltonian(&self, x: &Vector) -> f64;
    fn check_domain(&self, x: &Vector) -> Result<()>;
    fn step(&self, x_k: &Vector, u: &Vector, h: f64, cfg: &NewtonConfig) -> Result<StepResult>;
    /// `(R̄, B̄)` of the step `x_k → x_next` as used in the ledger.
    fn ledger_matrices(&self, x_k: &Vector, x_next: &Vector) -> Result<(Matrix, Matrix)>;
}

pub(crate) fn check_step_inputs(stepper: &dyn Stepper, x_k: &Vector, u: &Vector, h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Config(format!("step size must be positive, got {h}")));
    }
    crate::error::check_dim("step state", stepper.state_dim(), x_k.len())?;
    crate::error::check_dim("step input", stepper.input_dim(), u.len())?;
    stepper.check_domain(x_k)
}
