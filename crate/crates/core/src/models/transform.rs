use std::fmt;
use std::sync::Arc;

use super::{DomainFn, PhdaeSystem};
use crate::calculus::{gonzalez_jacobian, inverse_discrete_jacobian, DiscreteJacobian, MatrixFn, VectorField};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};

/// Two-point matrix evaluator `(x, x′) ↦ M̄(x, x′)`.
pub type TwoPointMat = Arc<dyn Fn(&Vector, &Vector) -> Matrix + Send + Sync>;

/// State map `x = φ(x̃)` and left multiplier `U(x̃)` with discrete companions.
#[derive(Clone)]
pub struct SystemTransformation {
    pub phi: VectorField,
    pub phi_inv: VectorField,
    pub u: MatrixFn,
    pub dj_phi: DiscreteJacobian,
    pub u_bar: TwoPointMat,
}

impl fmt::Debug for SystemTransformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemTransformation")
            .field("phi", &self.phi)
            .field("dj_phi", &self.dj_phi)
            .finish()
    }
}

fn inverse_or_nan(m: &Matrix) -> Matrix {
    m.clone()
        .try_inverse()
        .unwrap_or_else(|| Matrix::from_element(m.ncols(), m.nrows(), f64::NAN))
}

impl SystemTransformation {
    /// Gonzalez `D̄φ` and midpoint `Ū`.
    pub fn new(phi: VectorField, phi_inv: VectorField, u: MatrixFn) -> Self {
        let dj_phi = gonzalez_jacobian(&phi);
        let u2 = u.clone();
        let u_bar: TwoPointMat = Arc::new(move |x, xp| u2(&((x + xp) * 0.5)));
        Self {
            phi,
            phi_inv,
            u,
            dj_phi,
            u_bar,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(
            VectorField::identity(n),
            VectorField::identity(n),
            Arc::new(move |_| Matrix::identity(n, n)),
        )
    }

    /// `φ(x̃) = V x̃` with constant multiplier `U`.
    pub fn linear(v: Matrix, u: Matrix) -> Result<Self> {
        let v_inv = v
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularMatrix("linear transformation map".into()))?;
        if u.clone().try_inverse().is_none() {
            return Err(Error::SingularMatrix("transformation multiplier U".into()));
        }
        let mut t = Self::new(VectorField::linear(v.clone()), VectorField::linear(v_inv), Arc::new(move |_| u.clone()));
        t.dj_phi = DiscreteJacobian::constant(v);
        Ok(t)
    }

    /// `(φ⁻¹, U⁻¹∘φ⁻¹)` with the inverse discrete Jacobian.
    pub fn inverse(&self) -> Self {
        let (u, inv) = (self.u.clone(), self.phi_inv.clone());
        let u_new: MatrixFn = Arc::new(move |x| inverse_or_nan(&u(&inv.value(x))));
        let (ub, inv2) = (self.u_bar.clone(), self.phi_inv.clone());
        let u_bar: TwoPointMat =
            Arc::new(move |x, xp| inverse_or_nan(&ub(&inv2.value(x), &inv2.value(xp))));
        Self {
            phi: self.phi_inv.clone(),
            phi_inv: self.phi.clone(),
            u: u_new,
            dj_phi: inverse_discrete_jacobian(&self.dj_phi, &self.phi_inv),
            u_bar,
        }
    }

    /// Largest `‖φ(φ⁻¹(x)) − x‖∞` over the samples.
    pub fn round_trip_error(&self, samples: &[Vector]) -> f64 {
        samples
            .iter()
            .map(|x| (self.phi.value(&self.phi_inv.value(x)) - x).amax())
            .fold(0.0, f64::max)
    }
}

/// Transformed system in the coordinates `x̃`.
///
/// A singular `U` at an evaluation point yields NaN co-states, which the
/// validators and Newton solver treat as failures.
pub fn transform_system(sys: &PhdaeSystem, t: &SystemTransformation) -> PhdaeSystem {
    let phi = t.phi.clone();
    let u = t.u.clone();

    let (s, p, uu) = (sys.clone(), phi.clone(), u.clone());
    let e = move |x: &Vector| uu(x).transpose() * s.e(&p.value(x)) * p.jacobian(x);
    let (s, p, uu) = (sys.clone(), phi.clone(), u.clone());
    let j = move |x: &Vector| {
        let um = uu(x);
        um.transpose() * s.j(&p.value(x)) * um
    };
    let (s, p, uu) = (sys.clone(), phi.clone(), u.clone());
    let r = move |x: &Vector| {
        let um = uu(x);
        um.transpose() * s.r(&p.value(x)) * um
    };
    let (s, p, uu) = (sys.clone(), phi.clone(), u.clone());
    let b = move |x: &Vector| uu(x).transpose() * s.b(&p.value(x));
    let (s, p, uu) = (sys.clone(), phi.clone(), u.clone());
    let z = move |x: &Vector| {
        uu(x)
            .lu()
            .solve(&s.z(&p.value(x)))
            .unwrap_or_else(|| Vector::from_element(s.n, f64::NAN))
    };
    let domain: Option<DomainFn> = sys.domain.clone().map(|d| {
        let p = phi.clone();
        Arc::new(move |x: &Vector| d(&p.value(x))) as DomainFn
    });

    PhdaeSystem {
        name: format!("{} (transformed)", sys.name),
        n: t.phi.in_dim,
        m: sys.m,
        e: Arc::new(e),
        j: Arc::new(j),
        r: Arc::new(r),
        b: Arc::new(b),
        z: Arc::new(z),
        hamiltonian: sys.hamiltonian.compose(&phi),
        domain,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::ScalarField;
    use crate::models::validate_phdae;

    fn pendulum_like() -> PhdaeSystem {
        // H = ½x₁² + (1 − cos x₂), E = I, J canonical, R acting on the first slot.
        PhdaeSystem {
            name: "pend".into(),
            n: 2,
            m: 1,
            e: Arc::new(|_| Matrix::identity(2, 2)),
            j: Arc::new(|_| Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])),
            r: Arc::new(|x| Matrix::from_row_slice(2, 2, &[0.1 + x[1] * x[1], 0.0, 0.0, 0.0])),
            b: Arc::new(|_| Matrix::from_row_slice(2, 1, &[1.0, 0.0])),
            z: Arc::new(|x| Vector::from_vec(vec![x[0], x[1].sin()])),
            hamiltonian: ScalarField::new(
                2,
                |x| 0.5 * x[0] * x[0] + 1.0 - x[1].cos(),
                |x| Vector::from_vec(vec![x[0], x[1].sin()]),
            ),
            domain: None,
        }
    }

    fn shear() -> SystemTransformation {
        let phi = VectorField::new(
            2,
            2,
            |x| Vector::from_vec(vec![x[0] + x[1].powi(3), x[1]]),
            |x| Matrix::from_row_slice(2, 2, &[1.0, 3.0 * x[1] * x[1], 0.0, 1.0]),
        );
        let inv = VectorField::new(
            2,
            2,
            |y| Vector::from_vec(vec![y[0] - y[1].powi(3), y[1]]),
            |y| Matrix::from_row_slice(2, 2, &[1.0, -3.0 * y[1] * y[1], 0.0, 1.0]),
        );
        SystemTransformation::new(
            phi,
            inv,
            Arc::new(|x| Matrix::from_row_slice(2, 2, &[2.0, x[0], 0.0, 1.0 + x[1] * x[1]])),
        )
    }

    fn samples() -> Vec<Vector> {
        vec![
            Vector::from_vec(vec![0.3, -0.4]),
            Vector::from_vec(vec![-1.1, 0.9]),
            Vector::from_vec(vec![0.5, 1.5]),
        ]
    }

    #[test]
    fn identity_leaves_coefficients() {
        let sys = pendulum_like();
        let ts = transform_system(&sys, &SystemTransformation::identity(2));
        for x in samples() {
            assert_eq!(ts.e(&x), sys.e(&x));
            assert_eq!(ts.r(&x), sys.r(&x));
            assert_eq!(ts.z(&x), sys.z(&x));
        }
    }

    #[test]
    fn transformed_system_validates_and_keeps_dissipation() {
        let sys = pendulum_like();
        let t = shear();
        let ts = transform_system(&sys, &t);
        let rep = validate_phdae(&ts, &samples(), 1e-8).unwrap();
        assert!(rep.passed(), "{rep:?}");
        for x in samples() {
            let xs = t.phi.value(&x);
            let lhs = ts.z(&x).dot(&(ts.r(&x) * ts.z(&x)));
            let rhs = sys.z(&xs).dot(&(sys.r(&xs) * sys.z(&xs)));
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn round_trip_recovers_coefficients() {
        let sys = pendulum_like();
        let t = shear();
        assert!(t.round_trip_error(&samples()) < 1e-12);
        let back = transform_system(&transform_system(&sys, &t), &t.inverse());
        for x in samples() {
            assert!((back.e(&x) - sys.e(&x)).amax() < 1e-9);
            assert!((back.j(&x) - sys.j(&x)).amax() < 1e-9);
            assert!((back.r(&x) - sys.r(&x)).amax() < 1e-9);
            assert!((back.b(&x) - sys.b(&x)).amax() < 1e-9);
            assert!((back.z(&x) - sys.z(&x)).amax() < 1e-9);
        }
    }

    #[test]
    fn singular_linear_map_rejected() {
        assert!(SystemTransformation::linear(Matrix::zeros(2, 2), Matrix::identity(2, 2)).is_err());
    }
}
