//! Discrete gradients and discrete Jacobians.
//!
//! A discrete gradient `DG(x, x′)` satisfies `DG(x,x′)ᵀ(x′−x) = H(x′)−H(x)`
//! and `DG(x,x) = ∇H(x)`; discrete Jacobians are the row-wise analogue.

mod fields;
mod gradient;
mod jacobian;

pub use fields::{MatrixFn, ScalarField, ScalarFn, VectorField, VectorFn};
pub use gradient::{
    chain_rule_gradient, endpoint_gradient, gonzalez_gradient, lift_specified_gradient,
    midpoint_gradient, DgKind, DiscreteGradient, Side, SWITCH_TOL,
};
pub use jacobian::{gonzalez_jacobian, inverse_discrete_jacobian, DiscreteJacobian};

/// Build a discrete gradient of the given kind.
pub fn discrete_gradient(h: &ScalarField, kind: DgKind) -> DiscreteGradient {
    match kind {
        DgKind::Left => endpoint_gradient(h, Side::Left),
        DgKind::Right => endpoint_gradient(h, Side::Right),
        DgKind::MidpointExact => midpoint_gradient(h),
        DgKind::Gonzalez | DgKind::Composite => gonzalez_gradient(h),
    }
}
