//! Ready-built systems addressable by name.

mod appc;
mod four_particle;
mod linear_index1;
mod mass_spring;
mod sync_machine;

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use appc::{make_appc_counterexample, unsolvable_transition};
pub use four_particle::{
    constraint_jacobian as four_particle_constraint_jacobian, constraints as four_particle_constraints,
    dissipation_matrix, make_four_particle, potential, potential_gradient, FourParticle,
    FourParticleParams,
};
pub use linear_index1::{exact_solution as linear_index1_exact, make_linear_index1, make_linear_index1_semi_explicit};
pub use mass_spring::{
    consistent_initial_state as mass_spring_initial_state, constraint as mass_spring_constraint,
    make_mass_spring_singular, MassSpringParams,
};
pub use sync_machine::{default_inductance, make_synchronous_machine, InductanceFn, SyncMachineParams, DEFAULT_COUPLING};

use crate::calculus::{discrete_gradient, DgKind};
use crate::error::{Error, Result};
use crate::integrators::{ApproxMode, ConsistentApprox, DiscreteGradientPair};
use crate::models::{embed_semi_explicit, PhdaeSystem, SemiExplicitPhdae, TwoPointMat};
use crate::numerics::{segment, Vector};
use crate::structure::{build_pair_constant_e, build_pair_invertible_e, build_pair_semi_explicit, SvdReduction};

pub const MODEL_NAMES: [&str; 5] = [
    "four_particle",
    "mass_spring_singular",
    "synchronous_machine",
    "linear_index1",
    "appc_counterexample",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub state_dim: usize,
    pub input_dim: usize,
    pub semi_explicit: bool,
    pub constrained: bool,
}

pub fn catalog() -> Vec<ModelInfo> {
    vec![
        ModelInfo {
            name: "four_particle",
            description: "four particles, two quartic springs, two rigid bars, configuration-dependent damper",
            state_dim: 26,
            input_dim: 12,
            semi_explicit: true,
            constrained: true,
        },
        ModelInfo {
            name: "mass_spring_singular",
            description: "two spring-mass subsystems in redundant coordinates, constant singular mass matrix",
            state_dim: 7,
            input_dim: 3,
            semi_explicit: false,
            constrained: false,
        },
        ModelInfo {
            name: "synchronous_machine",
            description: "synchronous machine in current coordinates, state-dependent invertible E",
            state_dim: 8,
            input_dim: 5,
            semi_explicit: false,
            constrained: false,
        },
        ModelInfo {
            name: "linear_index1",
            description: "linear index-1 system reducing to x1' = -x1",
            state_dim: 2,
            input_dim: 0,
            semi_explicit: true,
            constrained: false,
        },
        ModelInfo {
            name: "appc_counterexample",
            description: "rank-one E built from grad H; DDR equations unsolvable for some transitions",
            state_dim: 2,
            input_dim: 0,
            semi_explicit: false,
            constrained: false,
        },
    ]
}

/// Parameters of one shipped model.
#[derive(Debug, Clone)]
pub enum ModelParams {
    FourParticle(FourParticleParams),
    MassSpring(MassSpringParams),
    SyncMachine(SyncMachineParams),
    LinearIndex1,
    AppC,
}

fn unknown_key(model: &str, key: &str) -> Error {
    Error::Config(format!("model '{model}' has no parameter '{key}'"))
}

impl ModelParams {
    pub fn defaults(name: &str) -> Result<Self> {
        Ok(match name {
            "four_particle" => Self::FourParticle(FourParticleParams::default()),
            "mass_spring_singular" => Self::MassSpring(MassSpringParams::default()),
            "synchronous_machine" => Self::SyncMachine(SyncMachineParams::default()),
            "linear_index1" => Self::LinearIndex1,
            "appc_counterexample" => Self::AppC,
            other => {
                return Err(Error::Config(format!(
                    "unknown model '{other}'; available: {}",
                    MODEL_NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::FourParticle(_) => "four_particle",
            Self::MassSpring(_) => "mass_spring_singular",
            Self::SyncMachine(_) => "synchronous_machine",
            Self::LinearIndex1 => "linear_index1",
            Self::AppC => "appc_counterexample",
        }
    }

    /// Override one scalar parameter. Array entries use a 1-based suffix
    /// (`m3`, `rs2`).
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let name = self.name();
        let indexed = |prefix: &str, len: usize| -> Option<usize> {
            let i: usize = key.strip_prefix(prefix)?.parse().ok()?;
            (1..=len).contains(&i).then(|| i - 1)
        };
        match self {
            Self::FourParticle(p) => match key {
                "k13" => p.k13 = value,
                "k24" => p.k24 = value,
                "eta0" => p.eta0 = value,
                "alpha" => p.alpha = value,
                _ => match indexed("m", 4) {
                    Some(i) => p.masses[i] = value,
                    None => return Err(unknown_key(name, key)),
                },
            },
            Self::MassSpring(p) => match key {
                "m1" => p.m1 = value,
                "m2" => p.m2 = value,
                "k1" => p.k1 = value,
                "k2" => p.k2 = value,
                "l10" => p.l10 = value,
                "l20" => p.l20 = value,
                "w" => p.w = value,
                _ => return Err(unknown_key(name, key)),
            },
            Self::SyncMachine(p) => match key {
                "friction" | "d" => p.friction = value,
                "inertia" | "jr" => p.inertia = value,
                "coupling" => {
                    let (l, dl) = default_inductance(value);
                    p.inductance = l;
                    p.inductance_derivative = dl;
                }
                _ => match (indexed("rs", 3), indexed("rr", 3)) {
                    (Some(i), _) => p.rs[i] = value,
                    (_, Some(i)) => p.rr[i] = value,
                    _ => return Err(unknown_key(name, key)),
                },
            },
            Self::LinearIndex1 | Self::AppC => return Err(unknown_key(name, key)),
        }
        Ok(())
    }
}

#[derive(Clone)]
enum Variant {
    FourParticle(FourParticle),
    MassSpring(MassSpringParams),
    SyncMachine,
    LinearIndex1(SemiExplicitPhdae),
    AppC,
}

/// A built model with the pieces each scheme needs.
#[derive(Clone)]
pub struct ShippedModel {
    pub name: &'static str,
    pub system: PhdaeSystem,
    variant: Variant,
}

impl std::fmt::Debug for ShippedModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ShippedModel").field("name", &self.name).finish()
    }
}

pub fn build_model(params: &ModelParams) -> Result<ShippedModel> {
    let (system, variant) = match params {
        ModelParams::FourParticle(p) => {
            let fp = make_four_particle(*p)?;
            (embed_semi_explicit(&fp.system), Variant::FourParticle(fp))
        }
        ModelParams::MassSpring(p) => (make_mass_spring_singular(*p)?, Variant::MassSpring(*p)),
        ModelParams::SyncMachine(p) => (make_synchronous_machine(p.clone())?, Variant::SyncMachine),
        ModelParams::LinearIndex1 => (make_linear_index1(), Variant::LinearIndex1(make_linear_index1_semi_explicit())),
        ModelParams::AppC => (make_appc_counterexample(), Variant::AppC),
    };
    Ok(ShippedModel {
        name: params.name(),
        system,
        variant,
    })
}

pub fn build_default(name: &str) -> Result<ShippedModel> {
    build_model(&ModelParams::defaults(name)?)
}

impl ShippedModel {
    pub fn semi_explicit(&self) -> Option<&SemiExplicitPhdae> {
        match &self.variant {
            Variant::FourParticle(fp) => Some(&fp.system),
            Variant::LinearIndex1(se) => Some(se),
            _ => None,
        }
    }

    pub fn is_constrained(&self) -> bool {
        matches!(self.variant, Variant::FourParticle(_))
    }

    /// Coefficient approximations for the semi-explicit scheme.
    pub fn sedg_approx(&self) -> Option<ConsistentApprox> {
        match &self.variant {
            Variant::FourParticle(fp) => Some(fp.sedg_approx()),
            Variant::LinearIndex1(se) => Some(ConsistentApprox::for_semi_explicit(se, ApproxMode::Midpoint)),
            _ => None,
        }
    }

    /// Coefficient approximations of the full system, as used by the pair
    /// and DDR schemes.
    pub fn approx(&self, mode: ApproxMode) -> ConsistentApprox {
        match (&self.variant, mode) {
            (Variant::FourParticle(fp), ApproxMode::Midpoint) => {
                let mut a = fp.sedg_approx();
                let full = ConsistentApprox::for_system(&self.system, mode);
                a.e = full.e;
                a.z = full.z;
                a
            }
            _ => ConsistentApprox::for_system(&self.system, mode),
        }
    }

    /// A discrete gradient pair built with the construction that fits the
    /// model's descriptor matrix.
    pub fn pair(&self, kind: DgKind) -> Result<DiscreteGradientPair> {
        match &self.variant {
            Variant::FourParticle(_) | Variant::LinearIndex1(_) => {
                let se = self.semi_explicit().expect("semi-explicit variant");
                let approx = self.sedg_approx().expect("semi-explicit variant");
                let dg1 = discrete_gradient(&se.h1, kind);
                build_pair_semi_explicit(
                    approx.e.expect("semi-explicit approximation has E11"),
                    &dg1,
                    approx.z.expect("semi-explicit approximation has z2"),
                    se.n1,
                    se.n2,
                )
            }
            Variant::MassSpring(p) => {
                let red = SvdReduction::new(&p.descriptor())?;
                let dg = discrete_gradient(&red.reduced_hamiltonian(&self.system.hamiltonian), kind);
                build_pair_constant_e(&red, &dg, red.midpoint_z2_hat(self.system.z.clone()))
            }
            Variant::SyncMachine => {
                let e = self.system.e.clone();
                let e_bar: TwoPointMat = Arc::new(move |x, xp| e(&((x + xp) * 0.5)));
                Ok(build_pair_invertible_e(e_bar, &discrete_gradient(&self.system.hamiltonian, kind)))
            }
            Variant::AppC => Err(Error::Config(
                "appc_counterexample has a state-dependent singular E; no pair construction applies".into(),
            )),
        }
    }

    pub fn initial_state(&self) -> Vector {
        match &self.variant {
            Variant::FourParticle(_) => FourParticle::initial_state(),
            Variant::MassSpring(p) => mass_spring_initial_state(p, 0.2),
            Variant::SyncMachine => Vector::from_vec(vec![1.0, -0.5, -0.5, 0.8, 0.0, 0.0, 0.5, 0.0]),
            Variant::LinearIndex1(_) => Vector::from_vec(vec![1.0, -1.0]),
            Variant::AppC => Vector::from_vec(vec![0.5, 0.5]),
        }
    }

    /// `(max|g(q)|, ‖Dg(q)v‖∞)` for constrained models.
    pub fn constraint_violation(&self, x: &Vector) -> Option<(f64, f64)> {
        match &self.variant {
            Variant::FourParticle(_) => Some(FourParticle::constraint_violation(x)),
            _ => None,
        }
    }

    /// Named state slices `(name, start, len)` usable as study observables.
    pub fn observables(&self) -> Vec<(String, usize, usize)> {
        let mut out: Vec<(String, usize, usize)> = (0..self.system.n).map(|i| (format!("x[{i}]"), i, 1)).collect();
        match &self.variant {
            Variant::FourParticle(_) => {
                for k in 0..4 {
                    out.push((format!("q{}", k + 1), 3 * k, 3));
                    out.push((format!("v{}", k + 1), 12 + 3 * k, 3));
                }
                out.push(("q".into(), 0, 12));
                out.push(("v".into(), 12, 12));
                out.push(("lambda".into(), 24, 2));
                out.push(("lambda1".into(), 24, 1));
                out.push(("lambda2".into(), 25, 1));
            }
            Variant::LinearIndex1(_) => {
                out.push(("x1".into(), 0, 1));
                out.push(("x2".into(), 1, 1));
            }
            _ => {}
        }
        out
    }

    pub fn observable(&self, name: &str, x: &Vector) -> Result<Vector> {
        let (_, start, len) = self
            .observables()
            .into_iter()
            .rev()
            .find(|(n, _, _)| n == name)
            .ok_or_else(|| Error::Config(format!("model '{}' has no observable '{name}'", self.name)))?;
        Ok(segment(x, start, len))
    }

    /// Reproducible random states from the model's validation domain.
    pub fn sample_states(&self, count: usize, seed: u64) -> Vec<Vector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.system.n;
        (0..count)
            .map(|_| match self.variant {
                Variant::SyncMachine => {
                    let mut x = Vector::from_fn(n, |_, _| rng.gen_range(-3.0..3.0));
                    x[7] = rng.gen_range(-PI..PI);
                    x
                }
                Variant::AppC => Vector::from_fn(n, |_, _| rng.gen_range(-1.5..1.5)),
                _ => Vector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0)),
            })
            .collect()
    }
}
