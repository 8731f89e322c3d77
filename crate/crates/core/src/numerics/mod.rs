//! Dense linear algebra primitives, the Newton solver and structural checks.
//!
//! Vectors and matrices are nalgebra's dynamically sized types. Everything in
//! here is a pure function of its arguments.

mod fd;
mod linalg;
mod newton;

pub use fd::finite_difference_jacobian;
pub use linalg::{
    least_squares_min_norm, numerical_rank, pseudo_inverse, symmetric_min_eigenvalue, svd,
    validate_structure, Svd, StructureReport,
};
pub use newton::{solve_newton, JacobianMode, NewtonConfig, NewtonReport};
pub(crate) use newton::fd_jacobian;

/// Column vector of reals.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix.
pub type Matrix = nalgebra::DMatrix<f64>;

/// Infinity norm; zero for empty vectors.
pub fn inf_norm(v: &Vector) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Largest absolute entry of a matrix.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn all_finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Block-diagonal matrix from a list of blocks.
pub fn block_diag(blocks: &[&Matrix]) -> Matrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Concatenate vectors end to end.
pub fn concat(parts: &[&Vector]) -> Vector {
    let n: usize = parts.iter().map(|p| p.len()).sum();
    let mut out = Vector::zeros(n);
    let mut k = 0;
    for p in parts {
        out.rows_mut(k, p.len()).copy_from(*p);
        k += p.len();
    }
    out
}

/// Rows `start..start+len` as an owned vector.
pub fn segment(v: &Vector, start: usize, len: usize) -> Vector {
    v.rows(start, len).into_owned()
}
