use super::{Matrix, Vector};

/// Central-difference Jacobian of `f` at `x` with absolute step `eps`.
pub fn finite_difference_jacobian<F>(f: F, x: &Vector, eps: f64) -> Matrix
where
    F: Fn(&Vector) -> Vector,
{
    let n = x.len();
    let mut cols: Vec<Vector> = Vec::with_capacity(n);
    let mut xp = x.clone();
    for j in 0..n {
        let orig = xp[j];
        xp[j] = orig + eps;
        let fp = f(&xp);
        xp[j] = orig - eps;
        let fm = f(&xp);
        xp[j] = orig;
        cols.push((fp - fm) / (2.0 * eps));
    }
    let m = cols.first().map(|c| c.len()).unwrap_or_else(|| f(x).len());
    let mut jac = Matrix::zeros(m, n);
    for (j, c) in cols.iter().enumerate() {
        jac.set_column(j, c);
    }
    jac
}
