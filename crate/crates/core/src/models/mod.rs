//! Continuous port-Hamiltonian descriptor systems.
//!
//! `E(x)ẋ = (J(x) − R(x)) z(x) + B(x) u`, `y = B(x)ᵀ z(x)` with
//! `E(x)ᵀ z(x) = ∇H(x)`, `J` skew and `R` positive semi-definite.

mod transform;
mod validate;

use std::fmt;
use std::sync::Arc;

pub use transform::{transform_system, SystemTransformation, TwoPointMat};
pub use validate::{validate_phdae, CheckResult, ValidationReport, GRADIENT_FD_TOL, RANK_REL_TOL};

use crate::calculus::{MatrixFn, ScalarField, VectorFn};
use crate::error::{Error, Result};
use crate::numerics::{block_diag, concat, segment, svd, Matrix, Vector};

pub type DomainFn = Arc<dyn Fn(&Vector) -> bool + Send + Sync>;

/// Evaluator bundle of a pHDAE.
#[derive(Clone)]
pub struct PhdaeSystem {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub e: MatrixFn,
    pub j: MatrixFn,
    pub r: MatrixFn,
    pub b: MatrixFn,
    pub z: VectorFn,
    pub hamiltonian: ScalarField,
    /// Validity predicate of the open state space; `None` means all of Rⁿ.
    pub domain: Option<DomainFn>,
}

impl fmt::Debug for PhdaeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhdaeSystem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .finish()
    }
}

impl PhdaeSystem {
    pub fn e(&self, x: &Vector) -> Matrix {
        (self.e)(x)
    }
    pub fn j(&self, x: &Vector) -> Matrix {
        (self.j)(x)
    }
    pub fn r(&self, x: &Vector) -> Matrix {
        (self.r)(x)
    }
    pub fn b(&self, x: &Vector) -> Matrix {
        (self.b)(x)
    }
    pub fn z(&self, x: &Vector) -> Vector {
        (self.z)(x)
    }
    pub fn h(&self, x: &Vector) -> f64 {
        self.hamiltonian.value(x)
    }

    pub fn in_domain(&self, x: &Vector) -> bool {
        x.iter().all(|v| v.is_finite()) && self.domain.as_ref().is_none_or(|d| d(x))
    }

    pub fn check_domain(&self, x: &Vector) -> Result<()> {
        if self.in_domain(x) {
            Ok(())
        } else {
            Err(Error::DomainExit(format!("{} at state {:?}", self.name, x.as_slice())))
        }
    }
}

/// Partitioned system with `E = diag(E₁₁, 0)` and a Hamiltonian `H₁(x₁)`.
#[derive(Clone)]
pub struct SemiExplicitPhdae {
    pub name: String,
    pub n1: usize,
    pub n2: usize,
    pub m: usize,
    pub e11: MatrixFn,
    pub h1: ScalarField,
    pub z2: VectorFn,
    pub j: MatrixFn,
    pub r: MatrixFn,
    pub b: MatrixFn,
    pub domain: Option<DomainFn>,
}

impl fmt::Debug for SemiExplicitPhdae {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemiExplicitPhdae")
            .field("name", &self.name)
            .field("n1", &self.n1)
            .field("n2", &self.n2)
            .field("m", &self.m)
            .finish()
    }
}

pub fn solve_transposed(e11: &Matrix, rhs: &Vector) -> Result<Vector> {
    let s = svd(e11).sigma;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if s.is_empty() {
        return Ok(Vector::zeros(0));
    }
    if smax == 0.0 || smin <= 1e-13 * smax {
        return Err(Error::SingularE11 { sigma_min: smin });
    }
    e11.transpose()
        .lu()
        .solve(rhs)
        .ok_or(Error::SingularE11 { sigma_min: smin })
}

impl SemiExplicitPhdae {
    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn x1(&self, x: &Vector) -> Vector {
        segment(x, 0, self.n1)
    }

    pub fn x2(&self, x: &Vector) -> Vector {
        segment(x, self.n1, self.n2)
    }

    /// `z₁ = E₁₁⁻ᵀ ∇H₁(x₁)`.
    pub fn z1(&self, x: &Vector) -> Result<Vector> {
        solve_transposed(&(self.e11)(x), &self.h1.gradient(&self.x1(x)))
    }

    pub fn hamiltonian(&self) -> ScalarField {
        let (h1, h2, n1, n2) = (self.h1.clone(), self.h1.clone(), self.n1, self.n2);
        ScalarField::new(
            n1 + n2,
            move |x| h1.value(&segment(x, 0, n1)),
            move |x| concat(&[&h2.gradient(&segment(x, 0, n1)), &Vector::zeros(n2)]),
        )
    }
}

/// View the semi-explicit system as a general pHDAE.
///
/// The returned co-state evaluator yields NaN entries where `E₁₁` is singular;
/// use [`SemiExplicitPhdae::z1`] to get the error instead.
pub fn embed_semi_explicit(se: &SemiExplicitPhdae) -> PhdaeSystem {
    let n2 = se.n2;
    let e11 = se.e11.clone();
    let e = move |x: &Vector| block_diag(&[&e11(x), &Matrix::zeros(n2, n2)]);
    let se_z = se.clone();
    let z = move |x: &Vector| {
        let z1 = se_z
            .z1(x)
            .unwrap_or_else(|_| Vector::from_element(se_z.n1, f64::NAN));
        concat(&[&z1, &(se_z.z2)(x)])
    };
    PhdaeSystem {
        name: se.name.clone(),
        n: se.n(),
        m: se.m,
        e: Arc::new(e),
        j: se.j.clone(),
        r: se.r.clone(),
        b: se.b.clone(),
        z: Arc::new(z),
        hamiltonian: se.hamiltonian(),
        domain: se.domain.clone(),
    }
}

/// Kernel form of a pHDAE with the auxiliary effort variable `f = z(x)`.
#[derive(Debug, Clone)]
pub struct DdrSystem {
    pub base: PhdaeSystem,
}

pub fn to_ddr(sys: &PhdaeSystem) -> DdrSystem {
    DdrSystem { base: sys.clone() }
}

impl DdrSystem {
    /// `K(x)` acting on `(−ẋ, f, u)`:
    /// `[[0, −Eᵀ, 0], [E, J−R, B], [0, −Bᵀ, 0]]`.
    pub fn kernel_matrix(&self, x: &Vector) -> Matrix {
        let (n, m) = (self.base.n, self.base.m);
        let e = self.base.e(x);
        let jr = self.base.j(x) - self.base.r(x);
        let b = self.base.b(x);
        let mut k = Matrix::zeros(2 * n + m, 2 * n + m);
        k.view_mut((0, n), (n, n)).copy_from(&(-e.transpose()));
        k.view_mut((n, 0), (n, n)).copy_from(&e);
        k.view_mut((n, n), (n, n)).copy_from(&jr);
        k.view_mut((n, 2 * n), (n, m)).copy_from(&b);
        k.view_mut((2 * n, n), (m, n)).copy_from(&(-b.transpose()));
        k
    }

    /// `[∇H; 0; y] + K(x)[−ẋ; f; u]`, zero along solutions.
    pub fn residual(&self, x: &Vector, xdot: &Vector, f: &Vector, u: &Vector, y: &Vector) -> Vector {
        let n = self.base.n;
        let lhs = concat(&[&self.base.hamiltonian.gradient(x), &Vector::zeros(n), y]);
        let w = concat(&[&(-xdot), f, u]);
        lhs + self.kernel_matrix(x) * w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_index1_se() -> SemiExplicitPhdae {
        SemiExplicitPhdae {
            name: "lin".into(),
            n1: 1,
            n2: 1,
            m: 0,
            e11: Arc::new(|_| Matrix::identity(1, 1)),
            h1: ScalarField::quadratic(Matrix::identity(1, 1)),
            z2: Arc::new(|x| Vector::from_element(1, x[1])),
            j: Arc::new(|_| Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])),
            r: Arc::new(|_| Matrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0])),
            b: Arc::new(|_| Matrix::zeros(2, 0)),
            domain: None,
        }
    }

    #[test]
    fn embedding_blocks() {
        let sys = embed_semi_explicit(&linear_index1_se());
        let x = Vector::from_vec(vec![0.7, -0.2]);
        assert_eq!(sys.e(&x), Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(sys.z(&x), x);
        assert!((sys.e(&x).transpose() * sys.z(&x) - sys.hamiltonian.gradient(&x)).amax() < 1e-15);
    }

    #[test]
    fn singular_e11_is_reported() {
        let mut se = linear_index1_se();
        se.e11 = Arc::new(|_| Matrix::zeros(1, 1));
        let x = Vector::from_vec(vec![0.7, -0.2]);
        assert!(matches!(se.z1(&x), Err(Error::SingularE11 { .. })));
        assert!(embed_semi_explicit(&se).z(&x)[0].is_nan());
    }

    #[test]
    fn ddr_residual_vanishes_on_exact_flow() {
        // ẋ₁ = −x₁ with x₂ = −x₁ and f = z(x) = x.
        let ddr = to_ddr(&embed_semi_explicit(&linear_index1_se()));
        let x = Vector::from_vec(vec![0.6, -0.6]);
        let xdot = Vector::from_vec(vec![-0.6, 0.6]);
        let r = ddr.residual(&x, &xdot, &x, &Vector::zeros(0), &Vector::zeros(0));
        assert!(r.amax() < 1e-15);
        let k = ddr.kernel_matrix(&x);
        assert!((&k + k.transpose()).amax() > 0.0);
        assert_eq!(k.shape(), (4, 4));
    }
}
