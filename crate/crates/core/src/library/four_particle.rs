//! Four point masses in 3-D, two nonlinear springs (1–3, 2–4), two rigid bars
//! (1–2, 3–4) and a viscous damper between particles 2 and 3.
//!
//! State layout: `q ∈ R¹²` (particles stacked), `v ∈ R¹²`, `λ ∈ R²`.

use std::sync::Arc;

use crate::calculus::{gonzalez_gradient, gonzalez_jacobian, DiscreteGradient, DiscreteJacobian, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::integrators::{ApproxMode, ConsistentApprox};
use crate::models::{SemiExplicitPhdae, TwoPointMat};
use crate::numerics::{segment, Matrix, Vector};

pub const NQ: usize = 12;
pub const N1: usize = 24;
pub const N2: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourParticleParams {
    pub masses: [f64; 4],
    pub k13: f64,
    pub k24: f64,
    pub eta0: f64,
    pub alpha: f64,
}

impl Default for FourParticleParams {
    fn default() -> Self {
        Self {
            masses: [1.0, 3.0, 2.3, 1.7],
            k13: 50.0,
            k24: 500.0,
            eta0: 1.0,
            alpha: 0.5,
        }
    }
}

impl FourParticleParams {
    pub fn validate(&self) -> Result<()> {
        let finite = self.masses.iter().chain([&self.k13, &self.k24, &self.eta0, &self.alpha]).all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("four_particle: parameters must be finite".into()));
        }
        if self.masses.iter().any(|&m| m <= 0.0) {
            return Err(Error::Config("four_particle: masses must be positive".into()));
        }
        if self.k13 <= 0.0 || self.k24 <= 0.0 {
            return Err(Error::Config("four_particle: stiffnesses must be positive".into()));
        }
        if self.eta0 < 0.0 || self.alpha < 0.0 {
            return Err(Error::Config("four_particle: eta0 and alpha must be non-negative".into()));
        }
        Ok(())
    }

    pub fn mass_matrix(&self) -> Matrix {
        Matrix::from_diagonal(&Vector::from_iterator(NQ, (0..NQ).map(|i| self.masses[i / 3])))
    }
}

fn particle(q: &Vector, i: usize) -> Vector {
    segment(q, 3 * i, 3)
}

/// `V(q) = ½k₁₃(|q₃−q₁|²−1)² + ½k₂₄(|q₄−q₂|²−1)²`.
pub fn potential(p: &FourParticleParams, q: &Vector) -> f64 {
    let s13 = (particle(q, 2) - particle(q, 0)).norm_squared() - 1.0;
    let s24 = (particle(q, 3) - particle(q, 1)).norm_squared() - 1.0;
    0.5 * p.k13 * s13 * s13 + 0.5 * p.k24 * s24 * s24
}

pub fn potential_gradient(p: &FourParticleParams, q: &Vector) -> Vector {
    let mut g = Vector::zeros(NQ);
    for (i, j, k) in [(0, 2, p.k13), (1, 3, p.k24)] {
        let d = particle(q, j) - particle(q, i);
        let f = d.clone() * (2.0 * k * (d.norm_squared() - 1.0));
        g.rows_mut(3 * j, 3).copy_from(&f);
        g.rows_mut(3 * i, 3).copy_from(&(-f));
    }
    g
}

/// `g₁ = ½(|q₂−q₁|²−1)`, `g₂ = ½(|q₄−q₃|²−1)`.
pub fn constraints(q: &Vector) -> Vector {
    let g1 = 0.5 * ((particle(q, 1) - particle(q, 0)).norm_squared() - 1.0);
    let g2 = 0.5 * ((particle(q, 3) - particle(q, 2)).norm_squared() - 1.0);
    Vector::from_vec(vec![g1, g2])
}

pub fn constraint_jacobian(q: &Vector) -> Matrix {
    let mut dg = Matrix::zeros(2, NQ);
    for (row, i, j) in [(0, 0, 1), (1, 2, 3)] {
        let d = particle(q, j) - particle(q, i);
        for c in 0..3 {
            dg[(row, 3 * j + c)] = d[c];
            dg[(row, 3 * i + c)] = -d[c];
        }
    }
    dg
}

/// `η(q)` times the coupling pattern between particles 2 and 3.
pub fn dissipation_matrix(p: &FourParticleParams, q: &Vector) -> Matrix {
    let eta = p.eta0 * (1.0 + p.alpha * (particle(q, 2) - particle(q, 1)).norm_squared());
    let mut r = Matrix::zeros(NQ, NQ);
    for c in 0..3 {
        r[(3 + c, 3 + c)] = eta;
        r[(6 + c, 6 + c)] = eta;
        r[(3 + c, 6 + c)] = -eta;
        r[(6 + c, 3 + c)] = -eta;
    }
    r
}

/// Interconnection matrix for a given constraint Jacobian `G`.
fn structure_j(dg: &Matrix) -> Matrix {
    let mut j = Matrix::zeros(N1 + N2, N1 + N2);
    for i in 0..NQ {
        j[(i, NQ + i)] = 1.0;
        j[(NQ + i, i)] = -1.0;
    }
    j.view_mut((NQ, N1), (NQ, N2)).copy_from(&(-dg.transpose()));
    j.view_mut((N1, NQ), (N2, NQ)).copy_from(dg);
    j
}

fn structure_r(rr: &Matrix) -> Matrix {
    let mut r = Matrix::zeros(N1 + N2, N1 + N2);
    r.view_mut((NQ, NQ), (NQ, NQ)).copy_from(rr);
    r
}

fn input_matrix() -> Matrix {
    let mut b = Matrix::zeros(N1 + N2, NQ);
    b.view_mut((NQ, 0), (NQ, NQ)).copy_from(&Matrix::identity(NQ, NQ));
    b
}

#[derive(Debug, Clone)]
pub struct FourParticle {
    pub params: FourParticleParams,
    pub system: SemiExplicitPhdae,
}

pub fn make_four_particle(params: FourParticleParams) -> Result<FourParticle> {
    params.validate()?;
    let p = params;
    let m = p.mass_matrix();
    let m2 = m.clone();
    let h1 = ScalarField::new(
        N1,
        move |x| {
            let v = segment(x, NQ, NQ);
            0.5 * v.dot(&(&m * &v)) + potential(&p, &segment(x, 0, NQ))
        },
        move |x| {
            let v = segment(x, NQ, NQ);
            let mut g = Vector::zeros(N1);
            g.rows_mut(0, NQ).copy_from(&potential_gradient(&p, &segment(x, 0, NQ)));
            g.rows_mut(NQ, NQ).copy_from(&(&m2 * v));
            g
        },
    );
    let e11 = crate::numerics::block_diag(&[&Matrix::identity(NQ, NQ), &p.mass_matrix()]);
    let system = SemiExplicitPhdae {
        name: "four_particle".into(),
        n1: N1,
        n2: N2,
        m: NQ,
        e11: Arc::new(move |_| e11.clone()),
        h1,
        z2: Arc::new(|x| segment(x, N1, N2)),
        j: Arc::new(|x| structure_j(&constraint_jacobian(&segment(x, 0, NQ)))),
        r: Arc::new(move |x| structure_r(&dissipation_matrix(&p, &segment(x, 0, NQ)))),
        b: Arc::new(|_| input_matrix()),
        domain: None,
    };
    Ok(FourParticle { params, system })
}

impl FourParticle {
    /// Bars of unit length, springs at rest, only particle 4 moving.
    pub fn initial_state() -> Vector {
        let mut x = Vector::zeros(N1 + N2);
        let q = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        x.rows_mut(0, NQ).copy_from_slice(&q);
        x[N1 - 1] = 20.0 / 17.0;
        x
    }

    pub fn constraint_field() -> VectorField {
        VectorField::new(NQ, 2, constraints, constraint_jacobian)
    }

    /// Gonzalez discrete Jacobian of the bar constraints. For these quadratic
    /// constraints it coincides with the midpoint Jacobian.
    pub fn discrete_constraint_jacobian() -> DiscreteJacobian {
        gonzalez_jacobian(&Self::constraint_field())
    }

    pub fn gonzalez_dg(&self) -> DiscreteGradient {
        gonzalez_gradient(&self.system.h1)
    }

    /// Coefficients of the specialised scheme: `D̄g(qᵏ, qᵏ⁺¹)` in both
    /// off-diagonal blocks, damping at the midpoint, `λ̄ = λᵏ⁺¹`.
    pub fn sedg_approx(&self) -> ConsistentApprox {
        let dgj = Self::discrete_constraint_jacobian();
        let j: TwoPointMat = Arc::new(move |x, xp| {
            let dg = dgj
                .eval(&segment(x, 0, NQ), &segment(xp, 0, NQ))
                .expect("constraint discrete Jacobian has fixed dimensions");
            structure_j(&dg)
        });
        let base = ConsistentApprox::for_semi_explicit(&self.system, ApproxMode::Midpoint);
        let base = base.with_matrix("J", j, ApproxMode::Custom).expect("J is a known coefficient");
        base.with_z(Arc::new(|_, xp| segment(xp, N1, N2)), ApproxMode::Right)
    }

    /// `(max|g(q)|, ‖Dg(q)v‖∞)`.
    pub fn constraint_violation(x: &Vector) -> (f64, f64) {
        let q = segment(x, 0, NQ);
        let v = segment(x, NQ, NQ);
        (constraints(&q).amax(), (constraint_jacobian(&q) * v).amax())
    }
}
