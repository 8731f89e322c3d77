//! Two spring-mass subsystems joined at a shared point, written in redundant
//! coordinates `q = (x₁, q₂, x₂)` (two elongations and the joint position).
//! The kinetic energy `½m₁v₁² + ½m₂(v₂+v₃)²` gives a constant singular mass
//! matrix. State: `(q, v, λ) ∈ R⁷`.

use std::sync::Arc;

use crate::calculus::ScalarField;
use crate::error::{Error, Result};
use crate::models::PhdaeSystem;
use crate::numerics::{block_diag, segment, Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassSpringParams {
    pub m1: f64,
    pub m2: f64,
    pub k1: f64,
    pub k2: f64,
    pub l10: f64,
    pub l20: f64,
    pub w: f64,
}

impl Default for MassSpringParams {
    fn default() -> Self {
        Self {
            m1: 1.0,
            m2: 2.0,
            k1: 1.0,
            k2: 1.0,
            l10: 1.0,
            l20: 1.0,
            w: 1.0,
        }
    }
}

impl MassSpringParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.m1, self.m2, self.k1, self.k2, self.l10, self.l20, self.w];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("mass_spring_singular: parameters must be finite".into()));
        }
        if self.m1 <= 0.0 || self.m2 <= 0.0 || self.k1 <= 0.0 || self.k2 <= 0.0 {
            return Err(Error::Config("mass_spring_singular: masses and stiffnesses must be positive".into()));
        }
        Ok(())
    }

    pub fn mass_matrix(&self) -> Matrix {
        Matrix::from_row_slice(3, 3, &[self.m1, 0.0, 0.0, 0.0, self.m2, self.m2, 0.0, self.m2, self.m2])
    }

    pub fn descriptor(&self) -> Matrix {
        block_diag(&[&Matrix::identity(3, 3), &self.mass_matrix(), &Matrix::zeros(1, 1)])
    }
}

/// Joint constraint `q₂ − x₁ − l₁₀ − w = 0` has this constant Jacobian.
pub fn constraint_jacobian() -> Matrix {
    Matrix::from_row_slice(1, 3, &[-1.0, 1.0, 0.0])
}

pub fn constraint(p: &MassSpringParams, q: &Vector) -> f64 {
    q[1] - q[0] - p.l10 - p.w
}

pub fn make_mass_spring_singular(p: MassSpringParams) -> Result<PhdaeSystem> {
    p.validate()?;
    let m = p.mass_matrix();
    let m2 = m.clone();
    let hamiltonian = ScalarField::new(
        7,
        move |x| {
            let v = segment(x, 3, 3);
            0.5 * v.dot(&(&m * &v)) + 0.5 * p.k1 * x[0] * x[0] + 0.5 * p.k2 * x[2] * x[2]
        },
        move |x| {
            let mut g = Vector::zeros(7);
            g[0] = p.k1 * x[0];
            g[2] = p.k2 * x[2];
            g.rows_mut(3, 3).copy_from(&(&m2 * segment(x, 3, 3)));
            g
        },
    );

    let dg = constraint_jacobian();
    let mut j = Matrix::zeros(7, 7);
    for i in 0..3 {
        j[(i, 3 + i)] = 1.0;
        j[(3 + i, i)] = -1.0;
    }
    j.view_mut((3, 6), (3, 1)).copy_from(&(-dg.transpose()));
    j.view_mut((6, 3), (1, 3)).copy_from(&dg);
    let mut b = Matrix::zeros(7, 3);
    b.view_mut((3, 0), (3, 3)).copy_from(&Matrix::identity(3, 3));
    let e = p.descriptor();

    Ok(PhdaeSystem {
        name: "mass_spring_singular".into(),
        n: 7,
        m: 3,
        e: Arc::new(move |_| e.clone()),
        j: Arc::new(move |_| j.clone()),
        r: Arc::new(|_| Matrix::zeros(7, 7)),
        b: Arc::new(move |_| b.clone()),
        z: Arc::new(move |x| {
            let mut z = x.clone();
            z[0] = p.k1 * x[0];
            z[1] = 0.0;
            z[2] = p.k2 * x[2];
            z
        }),
        hamiltonian,
        domain: None,
    })
}

/// A consistent initial state: joint constraint and its velocity form hold,
/// spring 1 stretched by `stretch`.
pub fn consistent_initial_state(p: &MassSpringParams, stretch: f64) -> Vector {
    let x1 = stretch;
    Vector::from_vec(vec![x1, x1 + p.l10 + p.w, -0.5 * stretch, 0.0, 0.0, 0.3, p.k2 * (-0.5 * stretch)])
}
