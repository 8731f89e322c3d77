use phdae_core::calculus::{
    discrete_gradient, gonzalez_gradient, gonzalez_jacobian, midpoint_gradient, DgKind, ScalarField,
    VectorField,
};
use phdae_core::library::{build_default, MODEL_NAMES};
use phdae_core::numerics::{Matrix, Vector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KINDS: [DgKind; 3] = [DgKind::Gonzalez, DgKind::Left, DgKind::Right];

type Sampler = Box<dyn Fn(u64) -> Vec<Vector>>;

/// Every Hamiltonian shipped with the model library, with a sampler for it.
fn shipped_hamiltonians() -> Vec<(String, ScalarField, Sampler)> {
    let mut out: Vec<(String, ScalarField, Sampler)> = Vec::new();
    for name in MODEL_NAMES {
        let m = build_default(name).unwrap();
        let m2 = m.clone();
        out.push((name.to_string(), m.system.hamiltonian.clone(), Box::new(move |s| m2.sample_states(40, s))));
        if let Some(se) = m.semi_explicit() {
            let (n1, m3) = (se.n1, m.clone());
            out.push((
                format!("{name}/H1"),
                se.h1.clone(),
                Box::new(move |s| m3.sample_states(40, s).iter().map(|x| x.rows(0, n1).into_owned()).collect()),
            ));
        }
    }
    out
}

#[test]
fn property_sweep_over_shipped_hamiltonians() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, h, sampler) in shipped_hamiltonians() {
        for kind in KINDS {
            let dg = discrete_gradient(&h, kind);
            let mut checked = 0;
            let mut seed = 0;
            while checked < 1000 {
                let pts = sampler(seed);
                seed += 1;
                for w in pts.windows(2) {
                    // Alternate far pairs with close ones.
                    let xp = if checked % 2 == 0 {
                        w[1].clone()
                    } else {
                        let s = 10f64.powf(rng.gen_range(-9.0..-1.0));
                        &w[0] + (&w[1] - &w[0]) * s
                    };
                    let x = &w[0];
                    let g = dg.eval(x, &xp).unwrap();
                    let (hx, hp) = (h.value(x), h.value(&xp));
                    let defect = (g.dot(&(&xp - x)) - (hp - hx)).abs();
                    assert!(
                        defect <= 1e-11 * (1.0 + hx.abs() + hp.abs()),
                        "{name} {kind:?}: directionality defect {defect:e}"
                    );
                    let c = (dg.eval(x, x).unwrap() - h.gradient(x)).amax();
                    assert!(c <= 1e-12, "{name} {kind:?}: consistency defect {c:e}");
                    checked += 1;
                }
            }
        }
    }
}

fn spd(seed: u64, n: usize) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    &a * a.transpose() + Matrix::identity(n, n) * 0.1
}

fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-5.0..5.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gonzalez_is_midpoint_for_quadratics(seed in 0u64..1000, a in vec_strategy(4), b in vec_strategy(4)) {
        let h = ScalarField::quadratic(spd(seed, 4));
        let (x, xp) = (Vector::from_vec(a), Vector::from_vec(b));
        let g = gonzalez_gradient(&h).eval(&x, &xp).unwrap();
        let m = midpoint_gradient(&h).eval(&x, &xp).unwrap();
        prop_assert!((g - m).amax() <= 1e-12 * (1.0 + x.amax() + xp.amax()) * 10.0);
    }

    #[test]
    fn directionality_of_a_quartic(a in vec_strategy(3), b in vec_strategy(3)) {
        let h = ScalarField::new(
            3,
            |x| x.iter().map(|v| v.powi(4)).sum::<f64>() + x[0] * x[1],
            |x| Vector::from_vec(vec![4.0 * x[0].powi(3) + x[1], 4.0 * x[1].powi(3) + x[0], 4.0 * x[2].powi(3)]),
        );
        let (x, xp) = (Vector::from_vec(a), Vector::from_vec(b));
        for kind in KINDS {
            let g = discrete_gradient(&h, kind).eval(&x, &xp).unwrap();
            let d = h.value(&xp) - h.value(&x);
            prop_assert!((g.dot(&(&xp - &x)) - d).abs() <= 1e-11 * (1.0 + h.value(&x).abs() + h.value(&xp).abs()));
        }
    }

    #[test]
    fn discrete_jacobian_rows_are_secant(a in vec_strategy(2), b in vec_strategy(2)) {
        let f = VectorField::new(
            2,
            2,
            |x| Vector::from_vec(vec![x[0].sin() * x[1], x[0] * x[0] - x[1].powi(3)]),
            |x| Matrix::from_row_slice(2, 2, &[x[0].cos() * x[1], x[0].sin(), 2.0 * x[0], -3.0 * x[1] * x[1]]),
        );
        let (x, xp) = (Vector::from_vec(a), Vector::from_vec(b));
        let j = gonzalez_jacobian(&f).eval(&x, &xp).unwrap();
        let lhs = &j * (&xp - &x);
        let rhs = f.value(&xp) - f.value(&x);
        prop_assert!((lhs - &rhs).amax() <= 1e-10 * (1.0 + rhs.amax()));
        prop_assert!((gonzalez_jacobian(&f).eval(&x, &x).unwrap() - f.jacobian(&x)).amax() <= 1e-14);
    }
}
