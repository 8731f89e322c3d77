//! Rank-one descriptor system `E(x) = (1,1)ᵀ∇H(x)ᵀ`, `z = ½(1,1)` with
//! `H = exp(½x₁²) − 1 + ½x₂²` and no dynamics coefficients. Under a midpoint
//! `Ē` the DDR equations have no solution for some transitions.

use std::sync::Arc;

use crate::calculus::ScalarField;
use crate::models::PhdaeSystem;
use crate::numerics::{Matrix, Vector};

fn grad(x: &Vector) -> Vector {
    Vector::from_vec(vec![x[0] * (0.5 * x[0] * x[0]).exp(), x[1]])
}

pub fn make_appc_counterexample() -> PhdaeSystem {
    PhdaeSystem {
        name: "appc_counterexample".into(),
        n: 2,
        m: 0,
        e: Arc::new(|x| {
            let g = grad(x);
            Matrix::from_row_slice(2, 2, &[g[0], g[1], g[0], g[1]])
        }),
        j: Arc::new(|_| Matrix::zeros(2, 2)),
        r: Arc::new(|_| Matrix::zeros(2, 2)),
        b: Arc::new(|_| Matrix::zeros(2, 0)),
        z: Arc::new(|_| Vector::from_element(2, 0.5)),
        hamiltonian: ScalarField::new(2, |x| (0.5 * x[0] * x[0]).exp() - 1.0 + 0.5 * x[1] * x[1], grad),
        domain: None,
    }
}

/// `x = (a, 0)`, `x′ = (0, a·√exp(a²/8))`: the step is orthogonal to
/// `∇H` at the midpoint while `H(x′) ≠ H(x)`.
pub fn unsolvable_transition(a: f64) -> (Vector, Vector) {
    let b = a * (0.125 * a * a).exp().sqrt();
    (Vector::from_vec(vec![a, 0.0]), Vector::from_vec(vec![0.0, b]))
}
