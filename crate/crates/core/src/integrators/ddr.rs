use std::fmt;
use std::sync::Arc;

use super::{check_step_inputs, ConsistentApprox, Ledger, StepResult, Stepper, TwoPointVec};
use crate::calculus::DiscreteGradient;
use crate::error::{check_dim, Error, Result};
use crate::models::DdrSystem;
use crate::numerics::{
    all_finite, concat, fd_jacobian, inf_norm, pseudo_inverse, segment, svd, Matrix, NewtonConfig,
    NewtonReport, Vector,
};
use crate::structure::check_colspace;

/// Relative tolerance of the column-space test inside the DDR stepper.
pub const COLSPACE_REL_TOL: f64 = 1e-8;
/// Relative singular-value cut used to split off the free directions.
const NULL_REL_TOL: f64 = 1e-10;

pub type StructureConstraint = Arc<dyn Fn(&Vector, &Vector, &Vector) -> Vector + Send + Sync>;

/// How the freedom left by the DDR equations is fixed.
#[derive(Clone)]
#[derive(Default)]
pub enum DdrCompletion {
    /// Extra equations `c(x_k, x_next, f̄) = 0` known from the model.
    KnownStructure(StructureConstraint),
    /// Minimize `‖f̄ − z(x_next)‖`.
    MatchCostateNext,
    /// Minimize `‖f̄ − z(x_k)‖`.
    MatchCostatePrev,
    /// Minimize `‖f̄ − z((x_k + x_next)/2)‖`.
    #[default]
    MatchCostateMidpoint,
    /// Minimize `‖f̄ − z̄(x_k, x_next)‖` for a user-supplied `z̄`.
    LeastNorm(TwoPointVec),
}


impl fmt::Debug for DdrCompletion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DdrCompletion::KnownStructure(_) => "known-structure",
            DdrCompletion::MatchCostateNext => "match-costate-next",
            DdrCompletion::MatchCostatePrev => "match-costate-prev",
            DdrCompletion::MatchCostateMidpoint => "match-costate-midpoint",
            DdrCompletion::LeastNorm(_) => "least-norm",
        };
        f.write_str(name)
    }
}

/// DDR scheme with unknowns `(x′, f̄)`:
/// `Ē(x′−x) = h(J̄−R̄)f̄ + hB̄u` and `Ēᵀf̄ = DG H(x, x′)`, the first divided by
/// `h` in the Newton residual.
#[derive(Debug, Clone)]
pub struct DdrStepper {
    pub ddr: DdrSystem,
    pub dg: DiscreteGradient,
    pub approx: ConsistentApprox,
    pub completion: DdrCompletion,
}

impl DdrStepper {
    pub fn new(
        ddr: DdrSystem,
        dg: DiscreteGradient,
        approx: ConsistentApprox,
        completion: DdrCompletion,
    ) -> Result<Self> {
        check_dim("DDR discrete gradient dimension", ddr.base.n, dg.dim)?;
        if approx.e.is_none() {
            return Err(Error::Config("DDR scheme needs an E approximation".into()));
        }
        Ok(Self {
            ddr,
            dg,
            approx,
            completion,
        })
    }

    fn e_bar(&self, x: &Vector, xp: &Vector) -> Matrix {
        (self.approx.e.as_ref().expect("checked in new"))(x, xp)
    }

    fn reference(&self, x_k: &Vector, xp: &Vector) -> Option<Vector> {
        let sys = &self.ddr.base;
        match &self.completion {
            DdrCompletion::KnownStructure(_) => None,
            DdrCompletion::MatchCostateNext => Some(sys.z(xp)),
            DdrCompletion::MatchCostatePrev => Some(sys.z(x_k)),
            DdrCompletion::MatchCostateMidpoint => Some(sys.z(&((x_k + xp) * 0.5))),
            DdrCompletion::LeastNorm(zb) => Some(zb(x_k, xp)),
        }
    }

    fn equations(&self, x_k: &Vector, w: &Vector, u: &Vector, h: f64) -> Result<Vector> {
        let n = self.ddr.base.n;
        let xp = segment(w, 0, n);
        let f = segment(w, n, n);
        let e = self.e_bar(x_k, &xp);
        let dynamics =
            &e * (&xp - x_k) / h - (self.approx.jr(x_k, &xp) * &f + (self.approx.b)(x_k, &xp) * u);
        let colsp = e.transpose() * &f - self.dg.eval(x_k, &xp)?;
        let mut parts = vec![dynamics, colsp];
        if let DdrCompletion::KnownStructure(c) = &self.completion {
            parts.push(c(x_k, &xp, &f));
        }
        let refs: Vec<&Vector> = parts.iter().collect();
        Ok(concat(&refs))
    }

    fn objective(&self, x_k: &Vector, w: &Vector) -> Option<Vector> {
        let n = self.ddr.base.n;
        let xp = segment(w, 0, n);
        self.reference(x_k, &xp).map(|zr| segment(w, n, n) - zr)
    }

    /// Gauss-Newton on the scheme equations; leftover free directions are
    /// spent on the completion objective.
    fn solve(&self, x_k: &Vector, u: &Vector, h: f64, cfg: &NewtonConfig) -> Result<NewtonReport> {
        cfg.validate()?;
        let n = self.ddr.base.n;
        let mut w = concat(&[x_k, &self.ddr.base.z(x_k)]);
        let f = |w: &Vector| self.equations(x_k, w, u, h);
        let g = |w: &Vector| Ok(self.objective(x_k, w).unwrap_or_else(|| Vector::zeros(0)));
        let has_objective = self.reference(x_k, x_k).is_some();

        let mut null_step = if has_objective { f64::INFINITY } else { 0.0 };
        let mut best: Option<(Vector, f64)> = None;
        let mut iterations = 0;
        let mut used_pinv = false;
        let mut norm;
        loop {
            let fv = f(&w)?;
            norm = if all_finite(&fv) { inf_norm(&fv) } else { f64::INFINITY };
            if best.as_ref().is_none_or(|b| norm < b.1) {
                best = Some((w.clone(), norm));
            }
            let settled = null_step <= NULL_REL_TOL * (1.0 + inf_norm(&w));
            if (norm <= cfg.tol && settled) || iterations >= cfg.max_iter || !norm.is_finite() {
                break;
            }

            let jf = fd_jacobian(&f, &w, fv.len(), cfg.fd_step)?;
            let dec = svd(&jf);
            let smax = dec.sigma.iter().cloned().fold(0.0, f64::max);
            let rank = dec.sigma.iter().filter(|&&s| s > NULL_REL_TOL * smax).count();
            used_pinv |= rank < 2 * n;
            let mut delta = -(pseudo_inverse(&jf, NULL_REL_TOL) * &fv);

            null_step = 0.0;
            if has_objective && rank < 2 * n {
                let null = dec.v.columns(rank, 2 * n - rank).into_owned();
                let gv = g(&w)?;
                let jg = fd_jacobian(&g, &w, gv.len(), cfg.fd_step)?;
                let a = &jg * &null;
                // Directions the objective does not see stay where Newton left them.
                let scale = svd(&jg).sigma.iter().cloned().fold(0.0, f64::max);
                let amax = svd(&a).sigma.iter().cloned().fold(0.0, f64::max);
                let rel = if amax > 0.0 { (1e-10 * scale / amax).max(1e-12) } else { 1.0 };
                let y = -(pseudo_inverse(&a, rel) * (gv + &jg * &delta));
                let correction = null * y;
                null_step = inf_norm(&correction);
                delta += correction;
            }
            w += delta;
            iterations += 1;
        }

        if norm <= cfg.tol {
            return Ok(NewtonReport {
                solution: w,
                residual_norm: norm,
                iterations,
                converged: true,
                used_pseudo_inverse: used_pinv,
            });
        }
        let (bw, bnorm) = best.expect("at least one evaluation");
        let xp = segment(&bw, 0, n);
        let e = self.e_bar(x_k, &xp);
        if let Ok(dg) = self.dg.eval(x_k, &xp) {
            let c = check_colspace(&e.transpose(), &dg, COLSPACE_REL_TOL)?;
            if !c.solvable {
                return Err(Error::ColspaceUnsolvable { residual: c.residual });
            }
        }
        Err(Error::NonConvergence {
            iterations,
            residual_norm: bnorm,
            best: bw.iter().cloned().collect(),
        })
    }

    fn finish(&self, x_k: &Vector, xp: Vector, f: Vector, u: &Vector, h: f64, report: NewtonReport) -> Result<StepResult> {
        self.ddr.base.check_domain(&xp)?;
        let (r, b) = self.ledger_matrices(x_k, &xp)?;
        let dh = self.ddr.base.h(&xp) - self.ddr.base.h(x_k);
        let (ledger, y) = Ledger::from_parts(dh, h, &f, &r, &b, u);
        Ok(StepResult {
            x_next: xp,
            costate: f,
            y,
            u: u.clone(),
            newton: report,
            ledger,
        })
    }

    /// Solve for the effort `f̄` of a prescribed transition `x_k → x_next`.
    ///
    /// Fails with `ColspaceUnsolvable` when `DG H` is not in the range of
    /// `Ēᵀ`, and with `NonConvergence` when no `f̄` reproduces the transition.
    pub fn attempt_transition(
        &self,
        x_k: &Vector,
        x_next: &Vector,
        u: &Vector,
        h: f64,
        cfg: &NewtonConfig,
    ) -> Result<StepResult> {
        check_step_inputs(self, x_k, u, h)?;
        check_dim("prescribed next state", self.ddr.base.n, x_next.len())?;
        let n = self.ddr.base.n;
        let e = self.e_bar(x_k, x_next);
        let dg = self.dg.eval(x_k, x_next)?;
        let c = check_colspace(&e.transpose(), &dg, COLSPACE_REL_TOL)?;
        if !c.solvable {
            return Err(Error::ColspaceUnsolvable { residual: c.residual });
        }

        let mut a = Matrix::zeros(2 * n, n);
        a.view_mut((0, 0), (n, n)).copy_from(&self.approx.jr(x_k, x_next));
        a.view_mut((n, 0), (n, n)).copy_from(&e.transpose());
        let rhs = concat(&[&(&e * (x_next - x_k) / h - (self.approx.b)(x_k, x_next) * u), &dg]);
        let mut f = pseudo_inverse(&a, NULL_REL_TOL) * &rhs;
        if let Some(zr) = self.reference(x_k, x_next) {
            let dec = svd(&a);
            let smax = dec.sigma.iter().cloned().fold(0.0, f64::max);
            let rank = dec.sigma.iter().filter(|&&s| s > NULL_REL_TOL * smax).count();
            if rank < n {
                let null = dec.v.columns(rank, n - rank).into_owned();
                f += &null * (null.transpose() * (zr - &f));
            }
        }
        let residual = inf_norm(&(&a * &f - &rhs));
        if residual > cfg.tol {
            return Err(Error::NonConvergence {
                iterations: 0,
                residual_norm: residual,
                best: x_next.iter().cloned().collect(),
            });
        }
        let report = NewtonReport {
            solution: concat(&[x_next, &f]),
            residual_norm: residual,
            iterations: 0,
            converged: true,
            used_pseudo_inverse: true,
        };
        self.finish(x_k, x_next.clone(), f, u, h, report)
    }
}

impl Stepper for DdrStepper {
    fn scheme(&self) -> &'static str {
        "ddr"
    }
    fn model_name(&self) -> &str {
        &self.ddr.base.name
    }
    fn state_dim(&self) -> usize {
        self.ddr.base.n
    }
    fn input_dim(&self) -> usize {
        self.ddr.base.m
    }
    fn hamiltonian(&self, x: &Vector) -> f64 {
        self.ddr.base.h(x)
    }
    fn check_domain(&self, x: &Vector) -> Result<()> {
        self.ddr.base.check_domain(x)
    }

    fn step(&self, x_k: &Vector, u: &Vector, h: f64, cfg: &NewtonConfig) -> Result<StepResult> {
        check_step_inputs(self, x_k, u, h)?;
        let n = self.ddr.base.n;
        let report = self.solve(x_k, u, h, cfg)?;
        let xp = segment(&report.solution, 0, n);
        let f = segment(&report.solution, n, n);
        self.finish(x_k, xp, f, u, h, report)
    }

    fn ledger_matrices(&self, x_k: &Vector, x_next: &Vector) -> Result<(Matrix, Matrix)> {
        Ok(((self.approx.r)(x_k, x_next), (self.approx.b)(x_k, x_next)))
    }
}

#[allow(clippy::too_many_arguments)]
pub fn step_ddr(
    ddr: &DdrSystem,
    dg: &DiscreteGradient,
    approx: &ConsistentApprox,
    completion: &DdrCompletion,
    x_k: &Vector,
    u: &Vector,
    h: f64,
    cfg: &NewtonConfig,
) -> Result<StepResult> {
    DdrStepper::new(ddr.clone(), dg.clone(), approx.clone(), completion.clone())?.step(x_k, u, h, cfg)
}
