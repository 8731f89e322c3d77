use std::fmt;
use std::sync::Arc;

use crate::numerics::{finite_difference_jacobian, inf_norm, Matrix, Vector};

pub type ScalarFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;

/// A smooth scalar function together with its gradient.
#[derive(Clone)]
pub struct ScalarField {
    pub dim: usize,
    value: ScalarFn,
    gradient: VectorFn,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField").field("dim", &self.dim).finish()
    }
}

impl ScalarField {
    pub fn new(
        dim: usize,
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    /// Gradient by central differences. Only for prototyping; shipped models
    /// supply analytic gradients.
    pub fn with_fd_gradient(
        dim: usize,
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        eps: f64,
    ) -> Self {
        let value: ScalarFn = Arc::new(value);
        let v2 = value.clone();
        let gradient = move |x: &Vector| {
            let jac = finite_difference_jacobian(|y| Vector::from_element(1, v2(y)), x, eps);
            jac.row(0).transpose()
        };
        Self {
            dim,
            value,
            gradient: Arc::new(gradient),
        }
    }

    /// `x ↦ ½ xᵀ Q x` for symmetric `Q`.
    pub fn quadratic(q: Matrix) -> Self {
        let q2 = q.clone();
        Self::new(q.nrows(), move |x| 0.5 * x.dot(&(&q * x)), move |x| &q2 * x)
    }

    pub fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        (self.gradient)(x)
    }

    /// Largest relative mismatch between the gradient and central differences
    /// of the value over `samples`.
    pub fn gradient_fd_mismatch(&self, samples: &[Vector], eps: f64) -> f64 {
        samples
            .iter()
            .map(|x| {
                let g = self.gradient(x);
                let fd = finite_difference_jacobian(|y| Vector::from_element(1, self.value(y)), x, eps)
                    .row(0)
                    .transpose();
                inf_norm(&(g.clone() - fd)) / (1.0 + inf_norm(&g))
            })
            .fold(0.0, f64::max)
    }

    /// `x̃ ↦ H(φ(x̃))` with gradient `Dφᵀ ∇H(φ)`.
    pub fn compose(&self, phi: &VectorField) -> ScalarField {
        let (h1, h2, p1, p2) = (self.clone(), self.clone(), phi.clone(), phi.clone());
        ScalarField::new(
            phi.in_dim,
            move |x| h1.value(&p1.value(x)),
            move |x| p2.jacobian(x).transpose() * h2.gradient(&p2.value(x)),
        )
    }
}

/// A smooth vector-valued map with its Jacobian.
#[derive(Clone)]
pub struct VectorField {
    pub in_dim: usize,
    pub out_dim: usize,
    value: VectorFn,
    jacobian: MatrixFn,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("in_dim", &self.in_dim)
            .field("out_dim", &self.out_dim)
            .finish()
    }
}

impl VectorField {
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        value: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
        jacobian: impl Fn(&Vector) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        Self {
            in_dim,
            out_dim,
            value: Arc::new(value),
            jacobian: Arc::new(jacobian),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, n, |x| x.clone(), move |_| Matrix::identity(n, n))
    }

    pub fn linear(a: Matrix) -> Self {
        let a2 = a.clone();
        Self::new(a.ncols(), a.nrows(), move |x| &a * x, move |_| a2.clone())
    }

    pub fn value(&self, x: &Vector) -> Vector {
        (self.value)(x)
    }

    pub fn jacobian(&self, x: &Vector) -> Matrix {
        (self.jacobian)(x)
    }

    pub fn jacobian_fd_mismatch(&self, samples: &[Vector], eps: f64) -> f64 {
        samples
            .iter()
            .map(|x| {
                let j = self.jacobian(x);
                let fd = finite_difference_jacobian(|y| self.value(y), x, eps);
                (j.clone() - fd).amax() / (1.0 + j.amax())
            })
            .fold(0.0, f64::max)
    }
}
