use std::sync::Arc;

use phdae_core::calculus::{gonzalez_jacobian, inverse_discrete_jacobian, DgKind, VectorField};
use phdae_core::integrators::{ApproxMode, DdrCompletion, DdrStepper, IntegrateOptions};
use phdae_core::library::{
    build_default, make_appc_counterexample, mass_spring_initial_state, unsolvable_transition, MassSpringParams,
};
use phdae_core::models::{to_ddr, transform_system, validate_phdae, SystemTransformation};
use phdae_core::numerics::{least_squares_min_norm, svd, Matrix, NewtonConfig, Vector};
use phdae_core::structure::{check_colspace, verify_transformation_invariance, SvdReduction};
use phdae_core::Error;
use proptest::prelude::*;

fn rot(a: f64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()])
}

fn twist(sign: f64) -> VectorField {
    VectorField::new(
        2,
        2,
        move |x| rot(sign * x.norm_squared()) * x,
        move |x| {
            let a = sign * x.norm_squared();
            let drot = Matrix::from_row_slice(2, 2, &[-a.sin(), -a.cos(), a.cos(), -a.sin()]);
            rot(a) + drot * x * (x.transpose() * (2.0 * sign))
        },
    )
}

#[test]
fn twist_map_discrete_jacobian_is_singular() {
    let (x, xp) = (Vector::zeros(2), Vector::from_vec(vec![(2.0 * std::f64::consts::PI).sqrt(), 0.0]));
    let phi = twist(1.0);
    let dj = gonzalez_jacobian(&phi);
    let m = dj.eval(&x, &xp).unwrap();
    let expected = Matrix::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 0.0]);
    assert!((m - expected).amax() <= 1e-12);
    let inv = inverse_discrete_jacobian(&dj, &twist(-1.0));
    let err = inv.eval(&phi.value(&x), &phi.value(&xp)).unwrap_err();
    assert!(matches!(err, Error::SingularDiscreteJacobian { .. }));
}

#[test]
fn counterexample_transition_is_unsolvable() {
    let sys = make_appc_counterexample();
    let (x, xp) = unsolvable_transition(1.0);
    let mid = (&x + &xp) * 0.5;
    let dg = phdae_core::calculus::discrete_gradient(&sys.hamiltonian, DgKind::Gonzalez);
    let c = check_colspace(&sys.e(&mid).transpose(), &dg.eval(&x, &xp).unwrap(), 1e-8).unwrap();
    assert!(!c.solvable && c.residual > 0.0);

    let approx = phdae_core::integrators::ConsistentApprox::for_system(&sys, ApproxMode::Midpoint);
    let st = DdrStepper::new(to_ddr(&sys), dg, approx, DdrCompletion::MatchCostateMidpoint).unwrap();
    let err = st.attempt_transition(&x, &xp, &Vector::zeros(0), 0.1, &NewtonConfig::default()).unwrap_err();
    assert!(matches!(err, Error::ColspaceUnsolvable { .. }));
}

#[test]
fn mass_spring_in_svd_coordinates_matches() {
    let m = build_default("mass_spring_singular").unwrap();
    let p = MassSpringParams::default();
    let red = SvdReduction::new(&p.descriptor()).unwrap();
    assert_eq!(red.rank, 5);
    let t = SystemTransformation::linear(red.v.clone(), red.u.clone()).unwrap();

    let transformed = transform_system(&m.system, &t);
    let samples = m.sample_states(20, 3);
    let tilde: Vec<Vector> = samples.iter().map(|x| t.phi_inv.value(x)).collect();
    assert!(validate_phdae(&transformed, &tilde, 1e-8).unwrap().passed());

    let x0 = mass_spring_initial_state(&p, 0.2);
    let u = |_: usize, t: f64| Vector::from_vec(vec![t.sin(), 0.0, 0.5]);
    let rep = verify_transformation_invariance(
        &m.system,
        &m.pair(DgKind::Gonzalez).unwrap(),
        &m.approx(ApproxMode::Midpoint),
        &t,
        &x0,
        &u,
        1.0,
        0.01,
        &IntegrateOptions::default(),
        1e-8,
    )
    .unwrap();
    assert!(rep.passed, "{rep:?}");
    assert_eq!(rep.per_step.len(), 100);
}

#[test]
fn nonlinear_transformation_preserves_structure() {
    let m = build_default("linear_index1").unwrap();
    // x1 = x̃1 + x̃1³/3, x2 = x̃2.
    let phi = VectorField::new(
        2,
        2,
        |x| Vector::from_vec(vec![x[0] + x[0].powi(3) / 3.0, x[1]]),
        |x| Matrix::from_row_slice(2, 2, &[1.0 + x[0] * x[0], 0.0, 0.0, 1.0]),
    );
    let inv = VectorField::new(
        2,
        2,
        |y| {
            // Cardano for s + s³/3 = y.
            let q = 1.5 * y[0];
            let r = (q * q + 1.0).sqrt();
            Vector::from_vec(vec![(q + r).cbrt() + (q - r).cbrt(), y[1]])
        },
        |_| Matrix::identity(2, 2),
    );
    let t = SystemTransformation::new(phi, inv, Arc::new(|x| Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0 + x[0].cos()])));
    let samples = m.sample_states(20, 5);
    assert!(t.round_trip_error(&samples) < 1e-12);
    let sys = transform_system(&m.system, &t);
    assert!(validate_phdae(&sys, &samples, 1e-8).unwrap().passed());
}

fn mat_strategy(r: usize, c: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(-3.0..3.0f64, r * c).prop_map(move |v| Matrix::from_row_slice(r, c, &v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn svd_reconstructs(a in mat_strategy(8, 6)) {
        let d = svd(&a);
        let mut s = Matrix::zeros(8, 6);
        for i in 0..6 { s[(i, i)] = d.sigma[i]; }
        prop_assert!((&d.u * s * d.v.transpose() - &a).amax() <= 1e-10 * (1.0 + a.amax()));
        prop_assert!((d.u.transpose() * &d.u - Matrix::identity(8, 8)).amax() <= 1e-11);
        prop_assert!((d.v.transpose() * &d.v - Matrix::identity(6, 6)).amax() <= 1e-11);
    }

    #[test]
    fn least_squares_residual_is_orthogonal(a in mat_strategy(5, 3), b in proptest::collection::vec(-3.0..3.0f64, 5)) {
        let b = Vector::from_vec(b);
        let (x, res) = least_squares_min_norm(&a, &b).unwrap();
        let r = &a * &x - &b;
        prop_assert!((r.norm() - res).abs() <= 1e-12);
        prop_assert!((a.transpose() * r).amax() <= 1e-9 * (1.0 + b.amax()) * (1.0 + a.amax()));
    }

    #[test]
    fn range_vectors_are_solvable(a in mat_strategy(3, 2), w in proptest::collection::vec(-3.0..3.0f64, 2)) {
        let rhs = &a * Vector::from_vec(w);
        prop_assert!(check_colspace(&a, &rhs, 1e-8).unwrap().solvable);
    }
}
