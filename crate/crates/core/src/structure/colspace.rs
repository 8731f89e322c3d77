use crate::error::Result;
use crate::numerics::{least_squares_min_norm, Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct ColspaceCheck {
    pub solvable: bool,
    /// 2-norm of `Ēᵀf − DG H` at the least-squares solution.
    pub residual: f64,
    /// Minimum-norm least-squares solution.
    pub f: Vector,
}

/// Is `dg` in the range of `e_bar_t`? Solvable iff the least-squares
/// residual is at most `rel_tol · ‖dg‖`.
pub fn check_colspace(e_bar_t: &Matrix, dg: &Vector, rel_tol: f64) -> Result<ColspaceCheck> {
    let (f, residual) = least_squares_min_norm(e_bar_t, dg)?;
    Ok(ColspaceCheck {
        solvable: residual <= rel_tol * dg.norm(),
        residual,
        f,
    })
}
