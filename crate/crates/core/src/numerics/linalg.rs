use super::{Matrix, Vector};
use crate::error::{Error, Result};

/// Full singular value decomposition `M = U diag(sigma) Vᵀ`.
///
/// `u` is `m×m`, `v` is `n×n`, `sigma` has `min(m, n)` entries sorted
/// non-increasingly.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vector,
    pub v: Matrix,
}

pub fn svd(m: &Matrix) -> Svd {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Svd {
            u: Matrix::identity(rows, rows),
            sigma: Vector::zeros(0),
            v: Matrix::identity(cols, cols),
        };
    }
    let dec = nalgebra::linalg::SVD::new(m.clone(), true, true);
    let u_thin = dec.u.expect("requested U");
    let vt_thin = dec.v_t.expect("requested Vᵀ");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));

    let sigma = Vector::from_iterator(k, order.iter().map(|&i| dec.singular_values[i]));
    let mut u_cols: Vec<Vector> = order.iter().map(|&i| u_thin.column(i).into_owned()).collect();
    let mut v_cols: Vec<Vector> = order
        .iter()
        .map(|&i| vt_thin.row(i).transpose().into_owned())
        .collect();
    complete_basis(&mut u_cols, rows);
    complete_basis(&mut v_cols, cols);
    Svd {
        u: Matrix::from_columns(&u_cols),
        sigma,
        v: Matrix::from_columns(&v_cols),
    }
}

/// Extend an orthonormal set to a basis of R^dim by Gram-Schmidt against the
/// canonical vectors.
fn complete_basis(cols: &mut Vec<Vector>, dim: usize) {
    let mut e = 0;
    while cols.len() < dim && e < dim {
        let mut cand = Vector::zeros(dim);
        cand[e] = 1.0;
        e += 1;
        for _ in 0..2 {
            for c in cols.iter() {
                let p = c.dot(&cand);
                cand -= c * p;
            }
        }
        let nrm = cand.norm();
        if nrm > 1e-8 {
            cols.push(cand / nrm);
        }
    }
}

/// Number of singular values above `rel_tol · σ_max`.
pub fn numerical_rank(m: &Matrix, rel_tol: f64) -> usize {
    let s = svd(m).sigma;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * smax).count()
}

/// Moore-Penrose pseudo-inverse with relative cut `rel_tol · σ_max`.
pub fn pseudo_inverse(m: &Matrix, rel_tol: f64) -> Matrix {
    let Svd { u, sigma, v } = svd(m);
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let mut out = Matrix::zeros(m.ncols(), m.nrows());
    if smax == 0.0 {
        return out;
    }
    for (i, &s) in sigma.iter().enumerate() {
        if s > rel_tol * smax {
            out += v.column(i) * u.column(i).transpose() / s;
        }
    }
    out
}

/// Minimum-norm least-squares solution of `A x = b` and the residual 2-norm.
pub fn least_squares_min_norm(a: &Matrix, b: &Vector) -> Result<(Vector, f64)> {
    crate::error::check_dim("least_squares_min_norm rhs", a.nrows(), b.len())?;
    let x = pseudo_inverse(a, 1e-12) * b;
    let res = (a * &x - b).norm();
    Ok((x, res))
}

/// Smallest eigenvalue of the symmetric part of a square matrix.
pub fn symmetric_min_eigenvalue(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

/// Outcome of the skew/PSD structural check.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub skew_ok: bool,
    pub psd_ok: bool,
    pub max_violation: f64,
}

pub fn validate_structure(j: &Matrix, r: &Matrix, tol: f64) -> Result<StructureReport> {
    if !j.is_square() || !r.is_square() {
        return Err(Error::DimensionMismatch {
            context: "validate_structure: non-square input".into(),
            expected: j.nrows(),
            got: j.ncols(),
        });
    }
    crate::error::check_dim("validate_structure", j.nrows(), r.nrows())?;
    let skew_violation = (j + j.transpose()).amax();
    let asym = (r - r.transpose()).amax();
    let min_eig = symmetric_min_eigenvalue(r);
    let psd_violation = asym.max((-min_eig).max(0.0));
    Ok(StructureReport {
        skew_ok: skew_violation <= tol,
        psd_ok: psd_violation <= tol,
        max_violation: skew_violation.max(psd_violation),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_identity_and_zero() {
        let s = svd(&Matrix::identity(3, 3));
        assert!(s.sigma.iter().all(|&x| (x - 1.0).abs() < 1e-14));
        let z = svd(&Matrix::zeros(2, 3));
        assert!(z.sigma.iter().all(|&x| x == 0.0));
        assert_eq!(z.u.shape(), (2, 2));
        assert_eq!(z.v.shape(), (3, 3));
    }

    #[test]
    fn svd_rectangular_full_factors() {
        let m = Matrix::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 1.0, 1.0, 0.0]);
        let Svd { u, sigma, v } = svd(&m);
        assert!((u.transpose() * &u - Matrix::identity(3, 3)).amax() < 1e-12);
        assert!((v.transpose() * &v - Matrix::identity(2, 2)).amax() < 1e-12);
        let mut s = Matrix::zeros(3, 2);
        s[(0, 0)] = sigma[0];
        s[(1, 1)] = sigma[1];
        assert!((u * s * v.transpose() - m).amax() < 1e-12);
        assert!(sigma[0] >= sigma[1]);
    }

    #[test]
    fn least_squares_examples() {
        let (x, r) =
            least_squares_min_norm(&Matrix::identity(2, 2), &Vector::from_vec(vec![3.0, 4.0]))
                .unwrap();
        assert_eq!(x, Vector::from_vec(vec![3.0, 4.0]));
        assert!(r < 1e-14);

        // Normal equations: AᵀA x = Aᵀb, 2x = 1.
        let a = Matrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let (x, r) = least_squares_min_norm(&a, &Vector::from_vec(vec![1.0, 0.0])).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15);
        assert!((r - 0.5f64.sqrt()).abs() < 1e-15);

        let (x, r) =
            least_squares_min_norm(&Matrix::zeros(2, 2), &Vector::from_vec(vec![1.0, 1.0]))
                .unwrap();
        assert_eq!(x, Vector::zeros(2));
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn least_squares_rejects_bad_rhs() {
        assert!(least_squares_min_norm(&Matrix::identity(2, 2), &Vector::zeros(3)).is_err());
    }

    #[test]
    fn structure_examples() {
        let j = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let rep = validate_structure(&j, &Matrix::identity(2, 2), 1e-12).unwrap();
        assert!(rep.skew_ok && rep.psd_ok);

        let r = Matrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -1.0]);
        let rep = validate_structure(&j, &r, 1e-12).unwrap();
        assert!(!rep.psd_ok);
        assert!((rep.max_violation - 1.0).abs() < 1e-14);

        assert!(validate_structure(&Matrix::zeros(2, 3), &Matrix::zeros(2, 2), 1e-8).is_err());
    }
}
