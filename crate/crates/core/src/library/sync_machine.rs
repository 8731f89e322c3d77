//! Synchronous machine in current coordinates `x = (I, p, θ)` with
//! `I ∈ R⁶` (stator, rotor), rotor momentum `p` and angle `θ`.
//! Inputs `(V_s ∈ R³, V_f, τ)`.

use std::fmt;
use std::sync::Arc;

use crate::calculus::ScalarField;
use crate::error::{Error, Result};
use crate::models::PhdaeSystem;
use crate::numerics::{segment, symmetric_min_eigenvalue, Matrix, Vector};

pub type InductanceFn = Arc<dyn Fn(f64) -> Matrix + Send + Sync>;

#[derive(Clone)]
pub struct SyncMachineParams {
    pub rs: [f64; 3],
    pub rr: [f64; 3],
    pub friction: f64,
    pub inertia: f64,
    pub inductance: InductanceFn,
    pub inductance_derivative: InductanceFn,
}

impl fmt::Debug for SyncMachineParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SyncMachineParams")
            .field("rs", &self.rs)
            .field("rr", &self.rr)
            .field("friction", &self.friction)
            .field("inertia", &self.inertia)
            .finish_non_exhaustive()
    }
}

/// Stator-rotor coupling pattern of the default inductance.
fn coupling() -> Matrix {
    let mut c = Matrix::zeros(6, 6);
    for i in 0..3 {
        c[(i, i + 3)] = 1.0;
        c[(i + 3, i)] = 1.0;
    }
    c
}

pub const DEFAULT_COUPLING: f64 = 0.1;

/// `L(θ) = 2I + ε cos(2θ) C` with `C` the symmetric stator-rotor coupling.
/// Eigenvalues lie in `[2−ε, 2+ε]`.
pub fn default_inductance(eps: f64) -> (InductanceFn, InductanceFn) {
    let c = coupling();
    let c2 = c.clone();
    (
        Arc::new(move |th| Matrix::identity(6, 6) * 2.0 + &c * (eps * (2.0 * th).cos())),
        Arc::new(move |th| &c2 * (-2.0 * eps * (2.0 * th).sin())),
    )
}

impl Default for SyncMachineParams {
    fn default() -> Self {
        let (l, dl) = default_inductance(DEFAULT_COUPLING);
        Self {
            rs: [0.5, 0.5, 0.5],
            rr: [0.8, 0.8, 0.8],
            friction: 0.1,
            inertia: 2.0,
            inductance: l,
            inductance_derivative: dl,
        }
    }
}

const THETA_SAMPLES: usize = 64;

impl SyncMachineParams {
    pub fn validate(&self) -> Result<()> {
        let scalars = self.rs.iter().chain(&self.rr).chain([&self.friction, &self.inertia]);
        if scalars.clone().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::Config(
                "synchronous_machine: resistances, friction and inertia must be positive".into(),
            ));
        }
        for k in 0..THETA_SAMPLES {
            let th = 2.0 * std::f64::consts::PI * k as f64 / THETA_SAMPLES as f64;
            let l = (self.inductance)(th);
            if l.shape() != (6, 6) || (self.inductance_derivative)(th).shape() != (6, 6) {
                return Err(Error::Config("synchronous_machine: inductance must be 6x6".into()));
            }
            if (&l - l.transpose()).amax() > 1e-12 || symmetric_min_eigenvalue(&l) <= 0.0 {
                return Err(Error::Config(format!(
                    "synchronous_machine: inductance not SPD at theta={th}"
                )));
            }
            let shift = (self.inductance)(th + 2.0 * std::f64::consts::PI);
            if (shift - l).amax() > 1e-10 {
                return Err(Error::Config(format!(
                    "synchronous_machine: inductance not 2π-periodic at theta={th}"
                )));
            }
        }
        Ok(())
    }
}

/// `z = (I, p/J_r, −½IᵀL′(θ)I)`; the sign of the last entry makes
/// `Eᵀz = ∇H` hold.
pub fn make_synchronous_machine(p: SyncMachineParams) -> Result<PhdaeSystem> {
    p.validate()?;
    let (l1, l2, dl1, dl2, dl3) = (
        p.inductance.clone(),
        p.inductance.clone(),
        p.inductance_derivative.clone(),
        p.inductance_derivative.clone(),
        p.inductance_derivative.clone(),
    );
    let jr = p.inertia;

    let hamiltonian = ScalarField::new(
        8,
        move |x| {
            let i = segment(x, 0, 6);
            0.5 * i.dot(&(l1(x[7]) * &i)) + x[6] * x[6] / (2.0 * jr)
        },
        move |x| {
            let i = segment(x, 0, 6);
            let mut g = Vector::zeros(8);
            g.rows_mut(0, 6).copy_from(&(l2(x[7]) * &i));
            g[6] = x[6] / jr;
            g[7] = 0.5 * i.dot(&(dl1(x[7]) * &i));
            g
        },
    );

    let e = move |x: &Vector| {
        let i = segment(x, 0, 6);
        let mut e = Matrix::identity(8, 8);
        e.view_mut((0, 0), (6, 6)).copy_from(&(p.inductance)(x[7]));
        e.view_mut((0, 7), (6, 1)).copy_from(&(dl2(x[7]) * &i));
        e
    };
    let z = move |x: &Vector| {
        let i = segment(x, 0, 6);
        let mut z = x.clone();
        z[6] = x[6] / jr;
        z[7] = -0.5 * i.dot(&(dl3(x[7]) * &i));
        z
    };

    let mut j = Matrix::zeros(8, 8);
    j[(6, 7)] = -1.0;
    j[(7, 6)] = 1.0;
    let mut r = Matrix::zeros(8, 8);
    for k in 0..3 {
        r[(k, k)] = p.rs[k];
        r[(k + 3, k + 3)] = p.rr[k];
    }
    r[(6, 6)] = p.friction;
    let mut b = Matrix::zeros(8, 5);
    for k in 0..3 {
        b[(k, k)] = 1.0;
    }
    b[(3, 3)] = 1.0;
    b[(6, 4)] = 1.0;

    Ok(PhdaeSystem {
        name: "synchronous_machine".into(),
        n: 8,
        m: 5,
        e: Arc::new(e),
        j: Arc::new(move |_| j.clone()),
        r: Arc::new(move |_| r.clone()),
        b: Arc::new(move |_| b.clone()),
        z: Arc::new(z),
        hamiltonian,
        domain: None,
    })
}
