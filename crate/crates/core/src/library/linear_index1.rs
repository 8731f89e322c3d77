//! `ẋ₁ = x₂`, `0 = −x₁ − x₂` with `H = ½x₁²`: on the constraint set the
//! flow is `ẋ₁ = −x₁`.

use std::sync::Arc;

use crate::calculus::ScalarField;
use crate::models::{PhdaeSystem, SemiExplicitPhdae};
use crate::numerics::{Matrix, Vector};

fn jr() -> (Matrix, Matrix) {
    (
        Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
        Matrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]),
    )
}

pub fn make_linear_index1_semi_explicit() -> SemiExplicitPhdae {
    let (j, r) = jr();
    SemiExplicitPhdae {
        name: "linear_index1".into(),
        n1: 1,
        n2: 1,
        m: 0,
        e11: Arc::new(|_| Matrix::identity(1, 1)),
        h1: ScalarField::quadratic(Matrix::identity(1, 1)),
        z2: Arc::new(|x| Vector::from_element(1, x[1])),
        j: Arc::new(move |_| j.clone()),
        r: Arc::new(move |_| r.clone()),
        b: Arc::new(|_| Matrix::zeros(2, 0)),
        domain: None,
    }
}

pub fn make_linear_index1() -> PhdaeSystem {
    let (j, r) = jr();
    PhdaeSystem {
        name: "linear_index1".into(),
        n: 2,
        m: 0,
        e: Arc::new(|_| Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])),
        j: Arc::new(move |_| j.clone()),
        r: Arc::new(move |_| r.clone()),
        b: Arc::new(|_| Matrix::zeros(2, 0)),
        z: Arc::new(|x| x.clone()),
        hamiltonian: ScalarField::new(2, |x| 0.5 * x[0] * x[0], |x| Vector::from_vec(vec![x[0], 0.0])),
        domain: None,
    }
}

/// `(x₁(0)e^{−t}, −x₁(0)e^{−t})`.
pub fn exact_solution(x10: f64, t: f64) -> Vector {
    let x1 = x10 * (-t).exp();
    Vector::from_vec(vec![x1, -x1])
}
