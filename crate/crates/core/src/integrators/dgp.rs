use super::{check_step_inputs, ConsistentApprox, DiscreteGradientPair, Ledger, StepResult, Stepper};
use crate::error::{check_dim, Result};
use crate::models::PhdaeSystem;
use crate::numerics::{solve_newton, Matrix, NewtonConfig, Vector};

/// `Ē(x,x′)(x′−x) = h(J̄−R̄)z̄(x,x′) + hB̄u`, `ȳ = B̄ᵀz̄`. The Newton residual is
/// this equation divided by `h`.
#[derive(Debug, Clone)]
pub struct DgpStepper {
    pub sys: PhdaeSystem,
    pub pair: DiscreteGradientPair,
    pub approx: ConsistentApprox,
}

impl DgpStepper {
    pub fn new(sys: PhdaeSystem, pair: DiscreteGradientPair, approx: ConsistentApprox) -> Result<Self> {
        check_dim("discrete gradient pair dimension", sys.n, pair.n)?;
        Ok(Self { sys, pair, approx })
    }

    fn residual(&self, x_k: &Vector, xp: &Vector, u: &Vector, h: f64) -> Result<Vector> {
        let e = self.pair.e(x_k, xp)?;
        let z = self.pair.z(x_k, xp)?;
        let b = (self.approx.b)(x_k, xp);
        Ok(e * (xp - x_k) / h - (self.approx.jr(x_k, xp) * z + b * u))
    }
}

impl Stepper for DgpStepper {
    fn scheme(&self) -> &'static str {
        "dgp"
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
        let f = |xp: &Vector| self.residual(x_k, xp, u, h);
        let report = solve_newton(&f, None, x_k, cfg)?.into_result()?;
        let xp = report.solution.clone();
        self.sys.check_domain(&xp)?;
        let z = self.pair.z(x_k, &xp)?;
        let (r, b) = self.ledger_matrices(x_k, &xp)?;
        let dh = self.sys.h(&xp) - self.sys.h(x_k);
        let (ledger, y) = Ledger::from_parts(dh, h, &z, &r, &b, u);
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
        Ok(((self.approx.r)(x_k, x_next), (self.approx.b)(x_k, x_next)))
    }
}

pub fn step_dgp(
    sys: &PhdaeSystem,
    pair: &DiscreteGradientPair,
    approx: &ConsistentApprox,
    x_k: &Vector,
    u: &Vector,
    h: f64,
    cfg: &NewtonConfig,
) -> Result<StepResult> {
    DgpStepper::new(sys.clone(), pair.clone(), approx.clone())?.step(x_k, u, h, cfg)
}
