use super::{build_pair_semi_explicit, transform_approx, transform_pair};
use crate::calculus::DiscreteGradient;
use crate::error::{Error, Result};
use crate::integrators::{
    integrate, ConsistentApprox, DgpStepper, DiscreteGradientPair, IntegrateOptions,
    IntegrationFailure, SedgStepper, Trajectory,
};
use crate::models::{embed_semi_explicit, transform_system, PhdaeSystem, SemiExplicitPhdae, SystemTransformation};
use crate::numerics::Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub max_state_deviation: f64,
    /// Deviation after each step.
    pub per_step: Vec<f64>,
    pub max_costate_deviation: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub mapping: String,
    /// Set when one of the runs failed; `passed` is then false.
    pub failure: Option<String>,
}

/// Step-by-step infinity-norm deviation of two state sequences, the second
/// mapped through `map` first.
pub fn compare_trajectories(
    a: &Trajectory,
    b: &Trajectory,
    map: &dyn Fn(&Vector) -> Vector,
) -> Vec<f64> {
    a.states
        .iter()
        .zip(&b.states)
        .skip(1)
        .map(|(xa, xb)| (xa - map(xb)).amax())
        .collect()
}

fn failed(mapping: &str, tol: f64, msg: String) -> EquivalenceReport {
    EquivalenceReport {
        max_state_deviation: f64::INFINITY,
        per_step: Vec::new(),
        max_costate_deviation: None,
        tolerance: tol,
        passed: false,
        mapping: mapping.to_string(),
        failure: Some(msg),
    }
}

type RunResult = std::result::Result<Trajectory, IntegrationFailure>;

fn run_pair(a: impl FnOnce() -> RunResult + Send, b: impl FnOnce() -> RunResult + Send) -> (RunResult, RunResult) {
    std::thread::scope(|s| {
        let ha = s.spawn(a);
        let rb = b();
        (ha.join().expect("integration thread panicked"), rb)
    })
}

/// Run the semi-explicit scheme and the pair scheme with the constructed pair
/// from identical data and compare states and co-states.
#[allow(clippy::too_many_arguments)]
pub fn verify_sedg_dgp_equivalence(
    se: &SemiExplicitPhdae,
    dg1: &DiscreteGradient,
    approx: &ConsistentApprox,
    x0: &Vector,
    input: &(dyn Fn(usize, f64) -> Vector + Sync),
    t_end: f64,
    h: f64,
    opts: &IntegrateOptions,
    tol: f64,
) -> Result<EquivalenceReport> {
    let mapping = "identity (semi-explicit vs. constructed pair)";
    let (e11, z2) = match (&approx.e, &approx.z) {
        (Some(e), Some(z)) => (e.clone(), z.clone()),
        _ => return Err(Error::Config("approximation must provide E11 and z2".into())),
    };
    let pair = build_pair_semi_explicit(e11, dg1, z2, se.n1, se.n2)?;
    let sedg = SedgStepper::new(se.clone(), dg1.clone(), approx.clone())?;
    let dgp = DgpStepper::new(embed_semi_explicit(se), pair, approx.clone())?;

    let (ra, rb) = run_pair(
        || integrate(&sedg, x0, input, t_end, h, opts),
        || integrate(&dgp, x0, input, t_end, h, opts),
    );
    let (ta, tb) = match (ra, rb) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) => return Ok(failed(mapping, tol, format!("semi-explicit run: {e}"))),
        (_, Err(e)) => return Ok(failed(mapping, tol, format!("pair run: {e}"))),
    };
    let per_step = compare_trajectories(&ta, &tb, &|x| x.clone());
    let costate = ta
        .steps
        .iter()
        .zip(&tb.steps)
        .map(|(a, b)| (&a.costate - &b.costate).amax())
        .fold(0.0, f64::max);
    let max = per_step.iter().cloned().fold(0.0, f64::max);
    Ok(EquivalenceReport {
        max_state_deviation: max,
        per_step,
        max_costate_deviation: Some(costate),
        tolerance: tol,
        passed: max <= tol,
        mapping: mapping.to_string(),
        failure: None,
    })
}

/// Integrate a system and its transformed counterpart and compare after
/// mapping the transformed states back through `φ`.
#[allow(clippy::too_many_arguments)]
pub fn verify_transformation_invariance(
    sys: &PhdaeSystem,
    pair: &DiscreteGradientPair,
    approx: &ConsistentApprox,
    t: &SystemTransformation,
    x0: &Vector,
    input: &(dyn Fn(usize, f64) -> Vector + Sync),
    t_end: f64,
    h: f64,
    opts: &IntegrateOptions,
    tol: f64,
) -> Result<EquivalenceReport> {
    let mapping = "x = phi(x_tilde)";
    let original = DgpStepper::new(sys.clone(), pair.clone(), approx.clone())?;
    let transformed = DgpStepper::new(
        transform_system(sys, t),
        transform_pair(pair, t),
        transform_approx(approx, t),
    )?;
    let x0t = t.phi_inv.value(x0);

    let (ra, rb) = run_pair(
        || integrate(&original, x0, input, t_end, h, opts),
        || integrate(&transformed, &x0t, input, t_end, h, opts),
    );
    let (ta, tb) = match (ra, rb) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) => return Ok(failed(mapping, tol, format!("original run: {e}"))),
        (_, Err(e)) => return Ok(failed(mapping, tol, format!("transformed run: {e}"))),
    };
    let per_step = compare_trajectories(&ta, &tb, &|x| t.phi.value(x));
    let max = per_step.iter().cloned().fold(0.0, f64::max);
    Ok(EquivalenceReport {
        max_state_deviation: max,
        per_step,
        max_costate_deviation: None,
        tolerance: tol,
        passed: max <= tol,
        mapping: mapping.to_string(),
        failure: None,
    })
}
