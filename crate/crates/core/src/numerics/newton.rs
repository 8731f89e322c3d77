use super::{all_finite, inf_norm, pseudo_inverse, Matrix, Vector};
use crate::error::{check_dim, Error, Result};

/// How Newton obtains the linearization of the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    /// Use the supplied Jacobian; fall back to differences if none is given.
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub jacobian_mode: JacobianMode,
    pub fd_step: f64,
    /// Backtracking shrink factor in (0, 1). `None` means full steps.
    pub damping: Option<f64>,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            jacobian_mode: JacobianMode::Analytic,
            fd_step: 1e-7,
            damping: None,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("newton tol must be positive, got {}", self.tol)));
        }
        if self.max_iter < 1 {
            return Err(Error::Config("newton max_iter must be at least 1".into()));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::Config(format!("fd_step must be positive, got {}", self.fd_step)));
        }
        if let Some(c) = self.damping {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::Config(format!("damping must lie in (0,1), got {c}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    /// Final iterate if converged, otherwise the iterate with the smallest residual.
    pub solution: Vector,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when at least one update came from the pseudo-inverse.
    pub used_pseudo_inverse: bool,
}

impl NewtonReport {
    pub fn into_result(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                iterations: self.iterations,
                residual_norm: self.residual_norm,
                best: self.solution.iter().cloned().collect(),
            })
        }
    }
}

type Residual<'a> = &'a dyn Fn(&Vector) -> Result<Vector>;
type Jacobian<'a> = &'a dyn Fn(&Vector) -> Result<Matrix>;

pub(crate) fn fd_jacobian(f: Residual<'_>, x: &Vector, m: usize, eps: f64) -> Result<Matrix> {
    let n = x.len();
    let mut jac = Matrix::zeros(m, n);
    let mut xp = x.clone();
    for j in 0..n {
        let orig = xp[j];
        xp[j] = orig + eps;
        let fp = f(&xp)?;
        xp[j] = orig - eps;
        let fm = f(&xp)?;
        xp[j] = orig;
        jac.set_column(j, &((fp - fm) / (2.0 * eps)));
    }
    Ok(jac)
}

fn newton_direction(jac: &Matrix, r: &Vector) -> (Vector, bool) {
    if jac.is_square() {
        if let Some(d) = jac.clone().lu().solve(&(-r)) {
            if all_finite(&d) {
                return (d, false);
            }
        }
    }
    (-(pseudo_inverse(jac, 1e-12) * r), true)
}

/// Solve `residual(x) = 0` starting from `guess`.
///
/// Non-convergence is reported through the returned report, not as an error;
/// errors are reserved for dimension mismatches and failures of the residual
/// evaluator itself.
pub fn solve_newton(
    residual: Residual<'_>,
    jacobian: Option<Jacobian<'_>>,
    guess: &Vector,
    cfg: &NewtonConfig,
) -> Result<NewtonReport> {
    cfg.validate()?;
    let mut x = guess.clone();
    let mut r = residual(&x)?;
    check_dim("newton residual vs unknowns", x.len(), r.len())?;

    let mut norm = if all_finite(&r) { inf_norm(&r) } else { f64::INFINITY };
    let mut best = (x.clone(), norm);
    let mut used_pinv = false;
    let mut iterations = 0;

    while norm > cfg.tol && iterations < cfg.max_iter && norm.is_finite() {
        let jac = match (cfg.jacobian_mode, jacobian) {
            (JacobianMode::Analytic, Some(j)) => j(&x)?,
            _ => fd_jacobian(residual, &x, r.len(), cfg.fd_step)?,
        };
        let (delta, pinv) = newton_direction(&jac, &r);
        used_pinv |= pinv;
        iterations += 1;

        let mut alpha = 1.0;
        let mut x_new = &x + &delta;
        let mut r_new = residual(&x_new)?;
        if let Some(shrink) = cfg.damping {
            let mut tries = 0;
            while tries < 30 && !(all_finite(&r_new) && inf_norm(&r_new) < norm) {
                alpha *= shrink;
                x_new = &x + &delta * alpha;
                r_new = residual(&x_new)?;
                tries += 1;
            }
        }
        x = x_new;
        r = r_new;
        norm = if all_finite(&r) { inf_norm(&r) } else { f64::INFINITY };
        if norm < best.1 {
            best = (x.clone(), norm);
        }
    }

    let converged = norm <= cfg.tol;
    let (solution, residual_norm) = if converged { (x, norm) } else { best };
    Ok(NewtonReport {
        solution,
        residual_norm,
        iterations,
        converged,
        used_pseudo_inverse: used_pinv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(f: impl Fn(f64) -> f64 + 'static) -> impl Fn(&Vector) -> Result<Vector> {
        move |x: &Vector| Ok(Vector::from_element(1, f(x[0])))
    }

    #[test]
    fn affine_converges_in_one_iteration() {
        let f = scalar(|x| x - 1.0);
        let rep = solve_newton(&f, None, &Vector::zeros(1), &NewtonConfig::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        assert!((rep.solution[0] - 1.0).abs() < 1e-10);
    }

    fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        for _ in 0..200 {
            let c = 0.5 * (a + b);
            if f(a) * f(c) <= 0.0 {
                b = c
            } else {
                a = c
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn square_root_of_two() {
        let f = scalar(|x| x * x - 2.0);
        let cfg = NewtonConfig { tol: 1e-12, ..Default::default() };
        let rep = solve_newton(&f, None, &Vector::from_element(1, 1.0), &cfg).unwrap();
        let oracle = bisect(|x| x * x - 2.0, 1.0, 2.0);
        assert!(rep.converged);
        assert!((rep.solution[0] - oracle).abs() < 1e-11);
    }

    #[test]
    fn no_real_root_reports_failure() {
        let f = scalar(|x| x * x + 1.0);
        let rep = solve_newton(&f, None, &Vector::zeros(1), &NewtonConfig::default()).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 50);
        assert!(rep.used_pseudo_inverse);
        assert!(rep.clone().into_result().is_err());
    }

    #[test]
    fn analytic_jacobian_is_used() {
        let f = scalar(|x| x * x * x - 8.0);
        let jac = |x: &Vector| Ok(Matrix::from_element(1, 1, 3.0 * x[0] * x[0]));
        let rep = solve_newton(&f, Some(&jac), &Vector::from_element(1, 3.0), &NewtonConfig::default())
            .unwrap();
        assert!(rep.converged);
        assert!((rep.solution[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn damping_still_converges() {
        let f = scalar(|x: f64| x.atan());
        let cfg = NewtonConfig { damping: Some(0.5), ..Default::default() };
        let rep = solve_newton(&f, None, &Vector::from_element(1, 3.0), &cfg).unwrap();
        assert!(rep.converged);
        // Undamped Newton diverges on arctan from x0 = 3.
        let plain = solve_newton(&f, None, &Vector::from_element(1, 3.0), &NewtonConfig::default())
            .unwrap();
        assert!(!plain.converged);
    }

    #[test]
    fn dimension_mismatch_is_fatal() {
        let f = |_: &Vector| Ok(Vector::zeros(2));
        assert!(solve_newton(&f, None, &Vector::zeros(3), &NewtonConfig::default()).is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        let f = scalar(|x| x);
        let cfg = NewtonConfig { tol: 0.0, ..Default::default() };
        assert!(solve_newton(&f, None, &Vector::zeros(1), &cfg).is_err());
    }
}
