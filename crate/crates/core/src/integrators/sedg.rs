use super::{check_step_inputs, ConsistentApprox, Ledger, StepResult, Stepper};
use crate::calculus::DiscreteGradient;
use crate::error::{check_dim, Error, Result};
use crate::models::{solve_transposed, SemiExplicitPhdae};
use crate::numerics::{concat, segment, solve_newton, Matrix, NewtonConfig, Vector};

/// Semi-explicit discrete gradient scheme.
///
/// Unknowns `(x₁′, x₂′, z̄₁)`:
/// `diag(Ē₁₁,0)(x′−x) = h(J̄−R̄)(z̄₁, z̄₂) + hB̄u` and `Ē₁₁ᵀz̄₁ = DG H₁(x₁, x₁′)`,
/// the first divided by `h` in the Newton residual.
#[derive(Debug, Clone)]
pub struct SedgStepper {
    pub se: SemiExplicitPhdae,
    pub dg1: DiscreteGradient,
    pub approx: ConsistentApprox,
}

impl SedgStepper {
    pub fn new(se: SemiExplicitPhdae, dg1: DiscreteGradient, approx: ConsistentApprox) -> Result<Self> {
        check_dim("semi-explicit discrete gradient dimension", se.n1, dg1.dim)?;
        if approx.e.is_none() || approx.z.is_none() {
            return Err(Error::Config(
                "semi-explicit scheme needs E11 and z2 approximations".into(),
            ));
        }
        Ok(Self { se, dg1, approx })
    }

    fn e11(&self, x: &Vector, xp: &Vector) -> Matrix {
        (self.approx.e.as_ref().expect("checked in new"))(x, xp)
    }

    fn z2(&self, x: &Vector, xp: &Vector) -> Vector {
        (self.approx.z.as_ref().expect("checked in new"))(x, xp)
    }

    fn costate(&self, x_k: &Vector, xp: &Vector, z1: &Vector) -> Vector {
        concat(&[z1, &self.z2(x_k, xp)])
    }

    fn residual(&self, x_k: &Vector, w: &Vector, u: &Vector, h: f64) -> Result<Vector> {
        let (n1, n) = (self.se.n1, self.se.n());
        let xp = segment(w, 0, n);
        let z1 = segment(w, n, n1);
        let e11 = self.e11(x_k, &xp);
        let z = self.costate(x_k, &xp, &z1);
        let rhs = self.approx.jr(x_k, &xp) * &z + (self.approx.b)(x_k, &xp) * u;

        let mut dyn_part = -rhs;
        let dx1 = segment(&xp, 0, n1) - segment(x_k, 0, n1);
        let mut top = dyn_part.rows_mut(0, n1);
        top += &e11 * dx1 / h;
        let dg = self.dg1.eval(&segment(x_k, 0, n1), &segment(&xp, 0, n1))?;
        let constraint = e11.transpose() * z1 - dg;
        Ok(concat(&[&dyn_part, &constraint]))
    }
}

impl Stepper for SedgStepper {
    fn scheme(&self) -> &'static str {
        "sedg"
    }
    fn model_name(&self) -> &str {
        &self.se.name
    }
    fn state_dim(&self) -> usize {
        self.se.n()
    }
    fn input_dim(&self) -> usize {
        self.se.m
    }
    fn hamiltonian(&self, x: &Vector) -> f64 {
        self.se.h1.value(&self.se.x1(x))
    }
    fn check_domain(&self, x: &Vector) -> Result<()> {
        let ok = x.iter().all(|v| v.is_finite()) && self.se.domain.as_ref().is_none_or(|d| d(x));
        if ok {
            Ok(())
        } else {
            Err(Error::DomainExit(format!("{} at state {:?}", self.se.name, x.as_slice())))
        }
    }

    fn step(&self, x_k: &Vector, u: &Vector, h: f64, cfg: &NewtonConfig) -> Result<StepResult> {
        check_step_inputs(self, x_k, u, h)?;
        let n = self.se.n();
        let z1_guess = self.se.z1(x_k)?;
        let guess = concat(&[x_k, &z1_guess]);
        let f = |w: &Vector| self.residual(x_k, w, u, h);
        let report = solve_newton(&f, None, &guess, cfg)?.into_result()?;
        let xp = segment(&report.solution, 0, n);
        let z1 = segment(&report.solution, n, self.se.n1);
        // The solve only used Ē₁₁ through products; make sure it is invertible at the root.
        solve_transposed(&self.e11(x_k, &xp), &z1)?;
        self.check_domain(&xp)?;

        let z = self.costate(x_k, &xp, &z1);
        let (r, b) = self.ledger_matrices(x_k, &xp)?;
        let dh = self.hamiltonian(&xp) - self.hamiltonian(x_k);
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

pub fn step_semi_explicit(
    se: &SemiExplicitPhdae,
    dg1: &DiscreteGradient,
    approx: &ConsistentApprox,
    x_k: &Vector,
    u: &Vector,
    h: f64,
    cfg: &NewtonConfig,
) -> Result<StepResult> {
    SedgStepper::new(se.clone(), dg1.clone(), approx.clone())?.step(x_k, u, h, cfg)
}
