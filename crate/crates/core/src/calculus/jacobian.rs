use std::fmt;
use std::sync::Arc;

use super::gradient::{coincident, DgKind};
use super::VectorField;
use crate::error::{check_dim, Error, Result};
use crate::numerics::{svd, Matrix, Vector};

type DjEval = Arc<dyn Fn(&Vector, &Vector) -> Result<Matrix> + Send + Sync>;

/// Two-point approximation of a Jacobian.
#[derive(Clone)]
pub struct DiscreteJacobian {
    pub in_dim: usize,
    pub out_dim: usize,
    pub kind: DgKind,
    eval: DjEval,
}

impl fmt::Debug for DiscreteJacobian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteJacobian")
            .field("in_dim", &self.in_dim)
            .field("out_dim", &self.out_dim)
            .field("kind", &self.kind)
            .finish()
    }
}

impl DiscreteJacobian {
    pub fn from_fn(
        in_dim: usize,
        out_dim: usize,
        kind: DgKind,
        eval: impl Fn(&Vector, &Vector) -> Result<Matrix> + Send + Sync + 'static,
    ) -> Self {
        Self {
            in_dim,
            out_dim,
            kind,
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, x: &Vector, xp: &Vector) -> Result<Matrix> {
        check_dim("discrete Jacobian first point", self.in_dim, x.len())?;
        check_dim("discrete Jacobian second point", self.in_dim, xp.len())?;
        (self.eval)(x, xp)
    }

    /// Constant Jacobian of a linear map.
    pub fn constant(a: Matrix) -> Self {
        Self::from_fn(a.ncols(), a.nrows(), DgKind::Composite, move |_, _| Ok(a.clone()))
    }
}

/// Row-wise Gonzalez construction: `DF(m) + (ΔF − DF(m)Δ) Δᵀ / ‖Δ‖²`.
pub fn gonzalez_jacobian(f: &VectorField) -> DiscreteJacobian {
    let f = f.clone();
    DiscreteJacobian::from_fn(f.in_dim, f.out_dim, DgKind::Gonzalez, move |x, xp| {
        if coincident(x, xp) {
            return Ok(f.jacobian(x));
        }
        let d = xp - x;
        let df = f.value(xp) - f.value(x);
        if d.len() == 1 {
            return Ok(Matrix::from_column_slice(df.len(), 1, (df / d[0]).as_slice()));
        }
        let jm = f.jacobian(&((x + xp) * 0.5));
        let defect = df - &jm * &d;
        Ok(jm + defect * d.transpose() / d.norm_squared())
    })
}

/// Discrete Jacobian of `φ⁻¹` as the inverse of `D̄φ` at the preimages.
pub fn inverse_discrete_jacobian(dj_phi: &DiscreteJacobian, phi_inv: &VectorField) -> DiscreteJacobian {
    let (dj, inv) = (dj_phi.clone(), phi_inv.clone());
    DiscreteJacobian::from_fn(phi_inv.in_dim, phi_inv.out_dim, DgKind::Composite, move |x, xp| {
        let inner = dj.eval(&inv.value(x), &inv.value(xp))?;
        invert_checked(&inner)
    })
}

fn invert_checked(m: &Matrix) -> Result<Matrix> {
    let s = svd(m).sigma;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if !m.is_square() || smax == 0.0 || smin <= 1e-12 * smax {
        return Err(Error::SingularDiscreteJacobian {
            sigma_min: if smin.is_finite() { smin } else { 0.0 },
        });
    }
    m.clone()
        .try_inverse()
        .ok_or(Error::SingularDiscreteJacobian { sigma_min: smin })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(a: &[f64]) -> Vector {
        Vector::from_row_slice(a)
    }

    fn rot(a: f64) -> Matrix {
        Matrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()])
    }

    /// x ↦ Rot(xᵀx) x and its inverse y ↦ Rot(−yᵀy) y.
    fn twist() -> (VectorField, VectorField) {
        let phi = VectorField::new(
            2,
            2,
            |x| rot(x.norm_squared()) * x,
            |x| {
                let xxt = x * x.transpose();
                rot(x.norm_squared()) * (Matrix::identity(2, 2) + rot(std::f64::consts::FRAC_PI_2) * xxt * 2.0)
            },
        );
        let inv = VectorField::new(
            2,
            2,
            |y| rot(-y.norm_squared()) * y,
            |y| {
                let yyt = y * y.transpose();
                rot(-y.norm_squared())
                    * (Matrix::identity(2, 2) - rot(std::f64::consts::FRAC_PI_2) * yyt * 2.0)
            },
        );
        (phi, inv)
    }

    #[test]
    fn linear_map_is_exact() {
        let a = Matrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.0, 4.0]);
        let dj = gonzalez_jacobian(&VectorField::linear(a.clone()));
        let m = dj.eval(&v(&[1.0, 2.0, 3.0]), &v(&[-2.0, 0.5, 7.0])).unwrap();
        assert!((m - a).amax() < 1e-13);
    }

    #[test]
    fn twist_map_singular_discrete_jacobian() {
        let (phi, inv) = twist();
        assert!(phi.jacobian_fd_mismatch(&[v(&[0.3, -0.5])], 1e-6) < 1e-6);
        assert!(inv.jacobian_fd_mismatch(&[v(&[0.3, -0.5])], 1e-6) < 1e-6);
        let x = v(&[0.0, 0.0]);
        let xp = v(&[(2.0 * std::f64::consts::PI).sqrt(), 0.0]);
        let m = gonzalez_jacobian(&phi).eval(&x, &xp).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 0.0]);
        assert!((m - expected).amax() < 1e-12);

        let inv_dj = inverse_discrete_jacobian(&gonzalez_jacobian(&phi), &inv);
        let err = inv_dj.eval(&phi.value(&x), &phi.value(&xp)).unwrap_err();
        assert!(matches!(err, Error::SingularDiscreteJacobian { .. }));
    }

    #[test]
    fn inverse_of_linear_and_consistency() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let ainv = a.clone().try_inverse().unwrap();
        let inv_dj = inverse_discrete_jacobian(
            &gonzalez_jacobian(&VectorField::linear(a)),
            &VectorField::linear(ainv.clone()),
        );
        let m = inv_dj.eval(&v(&[1.0, 2.0]), &v(&[0.0, -1.0])).unwrap();
        assert!((m - ainv).amax() < 1e-13);

        let (phi, inv) = twist();
        let inv_dj = inverse_discrete_jacobian(&gonzalez_jacobian(&phi), &inv);
        let y = v(&[0.4, 0.2]);
        let m = inv_dj.eval(&y, &y).unwrap();
        assert!((m - inv.jacobian(&y)).amax() < 1e-12);
    }

    #[test]
    fn quadratic_constraint_is_midpoint_jacobian() {
        let g = VectorField::new(
            2,
            1,
            |q| v(&[0.5 * (q.norm_squared() - 1.0)]),
            |q| Matrix::from_row_slice(1, q.len(), q.as_slice()),
        );
        let q = v(&[1.0, 0.2]);
        let qp = v(&[0.7, 0.8]);
        let m = gonzalez_jacobian(&g).eval(&q, &qp).unwrap();
        let mid = (&q + &qp) * 0.5;
        assert!((m - Matrix::from_row_slice(1, 2, mid.as_slice())).amax() < 1e-15);
    }
}
