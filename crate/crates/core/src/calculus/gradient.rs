use std::fmt;
use std::sync::Arc;

use super::{DiscreteJacobian, ScalarField, VectorField};
use crate::error::{check_dim, Result};
use crate::numerics::{concat, segment, Vector};

/// Relative threshold below which two points are treated as equal.
pub const SWITCH_TOL: f64 = 1e-14;

pub(crate) fn coincident(x: &Vector, xp: &Vector) -> bool {
    let d = xp - x;
    d.amax() <= SWITCH_TOL * (1.0 + x.amax())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgKind {
    Gonzalez,
    Left,
    Right,
    /// Plain gradient at the midpoint. A discrete gradient only for quadratic H.
    MidpointExact,
    /// Built from other discrete derivatives (lift, chain rule, ...).
    Composite,
}

type DgEval = Arc<dyn Fn(&Vector, &Vector) -> Result<Vector> + Send + Sync>;

/// Two-point approximation of a gradient.
#[derive(Clone)]
pub struct DiscreteGradient {
    pub dim: usize,
    pub kind: DgKind,
    eval: DgEval,
}

impl fmt::Debug for DiscreteGradient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteGradient")
            .field("dim", &self.dim)
            .field("kind", &self.kind)
            .finish()
    }
}

impl DiscreteGradient {
    pub fn from_fn(
        dim: usize,
        kind: DgKind,
        eval: impl Fn(&Vector, &Vector) -> Result<Vector> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            kind,
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, x: &Vector, xp: &Vector) -> Result<Vector> {
        check_dim("discrete gradient first point", self.dim, x.len())?;
        check_dim("discrete gradient second point", self.dim, xp.len())?;
        (self.eval)(x, xp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Project a base gradient so that directionality holds exactly.
fn corrected(h: &ScalarField, base: Vector, x: &Vector, xp: &Vector) -> Vector {
    let d = xp - x;
    let dh = h.value(xp) - h.value(x);
    if d.len() == 1 {
        return Vector::from_element(1, dh / d[0]);
    }
    let gd = base.dot(&d);
    base + d.clone() * ((dh - gd) / d.norm_squared())
}

pub fn gonzalez_gradient(h: &ScalarField) -> DiscreteGradient {
    let h = h.clone();
    DiscreteGradient::from_fn(h.dim, DgKind::Gonzalez, move |x, xp| {
        if coincident(x, xp) {
            return Ok(h.gradient(x));
        }
        let mid = (x + xp) * 0.5;
        Ok(corrected(&h, h.gradient(&mid), x, xp))
    })
}

pub fn endpoint_gradient(h: &ScalarField, side: Side) -> DiscreteGradient {
    let h = h.clone();
    let kind = match side {
        Side::Left => DgKind::Left,
        Side::Right => DgKind::Right,
    };
    DiscreteGradient::from_fn(h.dim, kind, move |x, xp| {
        if coincident(x, xp) {
            return Ok(h.gradient(x));
        }
        let base = match side {
            Side::Left => h.gradient(x),
            Side::Right => h.gradient(xp),
        };
        Ok(corrected(&h, base, x, xp))
    })
}

/// Gradient at the midpoint, exact only when H is quadratic.
pub fn midpoint_gradient(h: &ScalarField) -> DiscreteGradient {
    let h = h.clone();
    DiscreteGradient::from_fn(h.dim, DgKind::MidpointExact, move |x, xp| {
        Ok(h.gradient(&((x + xp) * 0.5)))
    })
}

/// Extend a discrete gradient of `H₁(x₁)` to `x = (x₁, x₂)` by zero padding.
pub fn lift_specified_gradient(dg1: &DiscreteGradient, n2: usize) -> DiscreteGradient {
    if n2 == 0 {
        return dg1.clone();
    }
    let n1 = dg1.dim;
    let dg1 = dg1.clone();
    DiscreteGradient::from_fn(n1 + n2, DgKind::Composite, move |x, xp| {
        let g = dg1.eval(&segment(x, 0, n1), &segment(xp, 0, n1))?;
        Ok(concat(&[&g, &Vector::zeros(n2)]))
    })
}

/// Discrete gradient of `H∘φ` as `D̄φᵀ · DG H(φ(x̃), φ(x̃′))`.
pub fn chain_rule_gradient(
    dj_phi: &DiscreteJacobian,
    dg_h: &DiscreteGradient,
    phi: &VectorField,
) -> Result<DiscreteGradient> {
    check_dim("chain rule: Jacobian rows vs gradient", dg_h.dim, dj_phi.out_dim)?;
    check_dim("chain rule: map output vs gradient", dg_h.dim, phi.out_dim)?;
    let (dj, dg, phi) = (dj_phi.clone(), dg_h.clone(), phi.clone());
    Ok(DiscreteGradient::from_fn(
        phi.in_dim,
        DgKind::Composite,
        move |x, xp| {
            let j = dj.eval(x, xp)?;
            let g = dg.eval(&phi.value(x), &phi.value(xp))?;
            Ok(j.transpose() * g)
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::gonzalez_jacobian;
    use crate::numerics::Matrix;

    fn v(a: &[f64]) -> Vector {
        Vector::from_row_slice(a)
    }

    fn quartic() -> ScalarField {
        ScalarField::new(2, |x| 0.25 * x.norm_squared().powi(2), |x| x * x.norm_squared())
    }

    #[test]
    fn gonzalez_quadratic_is_midpoint() {
        let h = ScalarField::quadratic(Matrix::identity(2, 2));
        let g = gonzalez_gradient(&h).eval(&v(&[1.0, 0.0]), &v(&[3.0, 0.0])).unwrap();
        assert!((g - v(&[2.0, 0.0])).amax() < 1e-15);
    }

    #[test]
    fn gonzalez_consistency_branch() {
        let h = quartic();
        let x = v(&[0.4, -1.2]);
        assert_eq!(gonzalez_gradient(&h).eval(&x, &x).unwrap(), h.gradient(&x));
    }

    #[test]
    fn one_dimensional_secant() {
        let h = ScalarField::new(1, |x| x[0].powi(3), |x| v(&[3.0 * x[0] * x[0]]));
        let g = gonzalez_gradient(&h).eval(&v(&[1.0]), &v(&[2.0])).unwrap();
        assert_eq!(g[0], 7.0);
        let q = ScalarField::quadratic(Matrix::identity(1, 1));
        let g = endpoint_gradient(&q, Side::Left).eval(&v(&[0.0]), &v(&[2.0])).unwrap();
        assert_eq!(g[0], 1.0);
    }

    #[test]
    fn left_endpoint_in_two_dimensions() {
        // Component along x′−x carries the secant slope, the orthogonal part is ∇H(x)=0.
        let h = ScalarField::quadratic(Matrix::identity(2, 2));
        let x = v(&[0.0, 0.0]);
        let xp = v(&[2.0, 0.0]);
        let g = endpoint_gradient(&h, Side::Left).eval(&x, &xp).unwrap();
        let d = &xp - &x;
        let along = (h.value(&xp) - h.value(&x)) / d.norm();
        let oracle = d.normalize() * along + (h.gradient(&x) - d.normalize() * h.gradient(&x).dot(&d.normalize()));
        assert!((g - oracle).amax() < 1e-15);
    }

    #[test]
    fn lift_pads_zeros() {
        let h1 = ScalarField::quadratic(Matrix::identity(1, 1));
        let dg1 = gonzalez_gradient(&h1);
        let lifted = lift_specified_gradient(&dg1, 1);
        let g = lifted.eval(&v(&[1.0, 5.0]), &v(&[3.0, -2.0])).unwrap();
        assert_eq!(g, v(&[2.0, 0.0]));
        let same = lift_specified_gradient(&dg1, 0);
        assert_eq!(same.dim, 1);
    }

    #[test]
    fn gonzalez_orthogonal_action_is_midpoint_gradient() {
        let h = quartic();
        let x = v(&[0.3, 1.1]);
        let xp = v(&[-0.8, 0.4]);
        let d = &xp - &x;
        let perp = v(&[-d[1], d[0]]);
        let g = gonzalez_gradient(&h).eval(&x, &xp).unwrap();
        let gm = h.gradient(&((&x + &xp) * 0.5));
        assert!((g.dot(&perp) - gm.dot(&perp)).abs() < 1e-12);
    }

    #[test]
    fn chain_rule_differs_from_direct_gonzalez() {
        let h = quartic();
        let a = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let phi = VectorField::linear(a);
        let chain =
            chain_rule_gradient(&gonzalez_jacobian(&phi), &gonzalez_gradient(&h), &phi).unwrap();
        let direct = gonzalez_gradient(&h.compose(&phi));
        let x = v(&[0.0, 0.0]);
        let xp = v(&[2.0, 0.0]);
        let c = chain.eval(&x, &xp).unwrap();
        let d = direct.eval(&x, &xp).unwrap();
        assert!((c[1] - 2.0).abs() < 1e-12);
        assert!((d[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chain_rule_identity_map() {
        let h = quartic();
        let phi = VectorField::identity(2);
        let dg = gonzalez_gradient(&h);
        let chain = chain_rule_gradient(&gonzalez_jacobian(&phi), &dg, &phi).unwrap();
        let x = v(&[0.2, 0.9]);
        let xp = v(&[1.0, -0.3]);
        assert!((chain.eval(&x, &xp).unwrap() - dg.eval(&x, &xp).unwrap()).amax() < 1e-15);
    }

    #[test]
    fn dimension_checked() {
        let dg = gonzalez_gradient(&quartic());
        assert!(dg.eval(&v(&[1.0]), &v(&[1.0, 2.0])).is_err());
    }
}
