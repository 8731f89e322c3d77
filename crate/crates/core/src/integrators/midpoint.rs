use super::{check_step_inputs, Ledger, StepResult, Stepper};
use crate::error::Result;
use crate::models::PhdaeSystem;
use crate::numerics::{solve_newton, Matrix, NewtonConfig, Vector};

/// Implicit midpoint rule applied to all coefficients and the co-state.
#[derive(Debug, Clone)]
pub struct MidpointStepper {
    pub sys: PhdaeSystem,
}

impl Stepper for MidpointStepper {
    fn scheme(&self) -> &'static str {
        "midpoint"
    }
    fn model_name(&self) -> &str {
        &self.sys.name
    }
    fn state_dim(&self) -> usize {
        self.sys.n
    }
    fn input_dim(&self) -> usize {
        self.sys.m
    }
    fn hamiltonian(&self, x: &Vector) -> f64 {
        self.sys.h(x)
    }
    fn check_domain(&self, x: &Vector) -> Result<()> {
        self.sys.check_domain(x)
    }

    fn step(&self, x_k: &Vector, u: &Vector, h: f64, cfg: &NewtonConfig) -> Result<StepResult> {
        check_step_inputs(self, x_k, u, h)?;
        let s = &self.sys;
        let f = |xp: &Vector| {
            let xm = (x_k + xp) * 0.5;
            let jr = s.j(&xm) - s.r(&xm);
            Ok(s.e(&xm) * (xp - x_k) / h - (jr * s.z(&xm) + s.b(&xm) * u))
        };
        let report = solve_newton(&f, None, x_k, cfg)?.into_result()?;
        let xp = report.solution.clone();
        s.check_domain(&xp)?;
        let z = s.z(&((x_k + &xp) * 0.5));
        let (r, b) = self.ledger_matrices(x_k, &xp)?;
        let (ledger, y) = Ledger::from_parts(s.h(&xp) - s.h(x_k), h, &z, &r, &b, u);
        Ok(StepResult {
            x_next: xp,
            costate: z,
            y,
            u: u.clone(),
            newton: report,
            ledger,
        })
    }

    fn ledger_matrices(&self, x_k: &Vector, x_next: &Vector) -> Result<(Matrix, Matrix)> {
        let xm = (x_k + x_next) * 0.5;
        Ok((self.sys.r(&xm), self.sys.b(&xm)))
    }
}

pub fn step_midpoint(
    sys: &PhdaeSystem,
    x_k: &Vector,
    u: &Vector,
    h: f64,
    cfg: &NewtonConfig,
) -> Result<StepResult> {
    MidpointStepper { sys: sys.clone() }.step(x_k, u, h, cfg)
}
