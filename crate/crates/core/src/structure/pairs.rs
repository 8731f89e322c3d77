use std::sync::Arc;

use crate::calculus::{DiscreteGradient, ScalarField, VectorField, VectorFn};
use crate::error::{check_dim, Error, Result};
use crate::integrators::{ConsistentApprox, DiscreteGradientPair, TwoPointVec};
use crate::models::{solve_transposed, SystemTransformation, TwoPointMat};
use crate::numerics::{block_diag, concat, segment, svd, Matrix, Vector};

/// Singular values below this fraction of σ₁ count as zero.
pub const RANK_CUT: f64 = 1e-10;
/// Ratios σᵢ/σ₁ inside this band make the rank decision unreliable.
pub const RANK_AMBIGUITY_BAND: (f64, f64) = (1e-12, 1e-8);

/// Pair `(diag(Ē₁₁,0), (Ē₁₁⁻ᵀ DG H₁, z̄₂))` of a semi-explicit system.
pub fn build_pair_semi_explicit(
    e11_bar: TwoPointMat,
    dg1: &DiscreteGradient,
    z2_bar: TwoPointVec,
    n1: usize,
    n2: usize,
) -> Result<DiscreteGradientPair> {
    check_dim("semi-explicit pair: discrete gradient", n1, dg1.dim)?;
    let e1 = e11_bar.clone();
    let e_bar = move |x: &Vector, xp: &Vector| Ok(block_diag(&[&e1(x, xp), &Matrix::zeros(n2, n2)]));
    let dg1 = dg1.clone();
    let z_bar = move |x: &Vector, xp: &Vector| {
        let g = dg1.eval(&segment(x, 0, n1), &segment(xp, 0, n1))?;
        let z1 = solve_transposed(&e11_bar(x, xp), &g)?;
        Ok(concat(&[&z1, &z2_bar(x, xp)]))
    };
    Ok(DiscreteGradientPair {
        n: n1 + n2,
        e_bar: Arc::new(e_bar),
        z_bar: Arc::new(z_bar),
    })
}

/// Pair `(Ē, Ē⁻ᵀ DG H)` for a pointwise invertible `Ē`.
pub fn build_pair_invertible_e(e_bar: TwoPointMat, dg: &DiscreteGradient) -> DiscreteGradientPair {
    let (e1, e2, dg) = (e_bar.clone(), e_bar, dg.clone());
    DiscreteGradientPair {
        n: dg.dim,
        e_bar: Arc::new(move |x, xp| Ok(e1(x, xp))),
        z_bar: Arc::new(move |x, xp| {
            solve_transposed(&e2(x, xp), &dg.eval(x, xp)?).map_err(|_| {
                Error::SingularMatrix("descriptor approximation of an invertible-E pair".into())
            })
        }),
    }
}

/// Splitting of a constant `E = U Σ Vᵀ` into range and kernel parts.
#[derive(Debug, Clone)]
pub struct SvdReduction {
    pub e: Matrix,
    pub rank: usize,
    pub u: Matrix,
    pub sigma1: Vector,
    pub v: Matrix,
}

impl SvdReduction {
    pub fn new(e: &Matrix) -> Result<Self> {
        if !e.is_square() {
            return Err(Error::DimensionMismatch {
                context: "constant descriptor matrix must be square".into(),
                expected: e.nrows(),
                got: e.ncols(),
            });
        }
        let dec = svd(e);
        let s1 = dec.sigma.iter().cloned().fold(0.0, f64::max);
        let mut rank = 0;
        if s1 > 0.0 {
            for &s in dec.sigma.iter() {
                let ratio = s / s1;
                if ratio >= RANK_AMBIGUITY_BAND.0 && ratio <= RANK_AMBIGUITY_BAND.1 {
                    return Err(Error::RankAmbiguous { ratio });
                }
                if ratio > RANK_CUT {
                    rank += 1;
                }
            }
        }
        Ok(Self {
            e: e.clone(),
            rank,
            u: dec.u,
            sigma1: dec.sigma.rows(0, rank).into_owned(),
            v: dec.v,
        })
    }

    pub fn n(&self) -> usize {
        self.e.nrows()
    }
    pub fn u1(&self) -> Matrix {
        self.u.columns(0, self.rank).into_owned()
    }
    pub fn u2(&self) -> Matrix {
        self.u.columns(self.rank, self.n() - self.rank).into_owned()
    }
    pub fn v1(&self) -> Matrix {
        self.v.columns(0, self.rank).into_owned()
    }
    pub fn v2(&self) -> Matrix {
        self.v.columns(self.rank, self.n() - self.rank).into_owned()
    }

    /// `x̃₁ ↦ H(V₁ x̃₁)`.
    pub fn reduced_hamiltonian(&self, h: &ScalarField) -> ScalarField {
        h.compose(&VectorField::linear(self.v1()))
    }

    /// `ẑ₂(x, x′) = U₂ᵀ z((x+x′)/2)`.
    pub fn midpoint_z2_hat(&self, z: VectorFn) -> TwoPointVec {
        let u2t = self.u2().transpose();
        Arc::new(move |x, xp| &u2t * z(&((x + xp) * 0.5)))
    }
}

/// Pair `(E, U₁Σ₁⁻¹ DG H̃₁(V₁ᵀx, V₁ᵀx′) + U₂ẑ₂(x, x′))` for constant `E`.
///
/// `dg_spec` is a discrete gradient of [`SvdReduction::reduced_hamiltonian`].
pub fn build_pair_constant_e(
    red: &SvdReduction,
    dg_spec: &DiscreteGradient,
    z2_hat: TwoPointVec,
) -> Result<DiscreteGradientPair> {
    check_dim("constant-E pair: reduced discrete gradient", red.rank, dg_spec.dim)?;
    let e = red.e.clone();
    let v1t = red.v1().transpose();
    let mut u1s = red.u1();
    for (j, s) in red.sigma1.iter().enumerate() {
        let mut col = u1s.column_mut(j);
        col /= *s;
    }
    let u2 = red.u2();
    let dg = dg_spec.clone();
    let z_bar = move |x: &Vector, xp: &Vector| {
        let g = dg.eval(&(&v1t * x), &(&v1t * xp))?;
        Ok(&u1s * g + &u2 * z2_hat(x, xp))
    };
    Ok(DiscreteGradientPair {
        n: red.n(),
        e_bar: Arc::new(move |_, _| Ok(e.clone())),
        z_bar: Arc::new(z_bar),
    })
}

fn invert_u(m: &Matrix) -> Result<Matrix> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularMatrix("discrete transformation multiplier".into()))
}

/// `Ê = Ūᵀ Ē(φ,φ′) D̄φ`, `ẑ = Ū⁻¹ z̄(φ,φ′)`.
pub fn transform_pair(pair: &DiscreteGradientPair, t: &SystemTransformation) -> DiscreteGradientPair {
    let (p1, t1) = (pair.clone(), t.clone());
    let e_hat = move |x: &Vector, xp: &Vector| {
        let (y, yp) = (t1.phi.value(x), t1.phi.value(xp));
        Ok((t1.u_bar)(x, xp).transpose() * p1.e(&y, &yp)? * t1.dj_phi.eval(x, xp)?)
    };
    let (p2, t2) = (pair.clone(), t.clone());
    let z_hat = move |x: &Vector, xp: &Vector| {
        let (y, yp) = (t2.phi.value(x), t2.phi.value(xp));
        Ok(invert_u(&(t2.u_bar)(x, xp))? * p2.z(&y, &yp)?)
    };
    DiscreteGradientPair {
        n: t.phi.in_dim,
        e_bar: Arc::new(e_hat),
        z_bar: Arc::new(z_hat),
    }
}

/// `Ĵ = ŪᵀJ̄(φ,φ′)Ū`, `R̂ = ŪᵀR̄(φ,φ′)Ū`, `B̂ = ŪᵀB̄(φ,φ′)`.
///
/// `Ē` is carried over as `ŪᵀĒ(φ,φ′)D̄φ` (NaN where `D̄φ` fails); a partial
/// co-state approximation has no canonical image and is dropped.
pub fn transform_approx(approx: &ConsistentApprox, t: &SystemTransformation) -> ConsistentApprox {
    let sandwich = |f: TwoPointMat| -> TwoPointMat {
        let t = t.clone();
        Arc::new(move |x, xp| {
            let ub = (t.u_bar)(x, xp);
            ub.transpose() * f(&t.phi.value(x), &t.phi.value(xp)) * ub
        })
    };
    let tb = t.clone();
    let b = approx.b.clone();
    let b_hat: TwoPointMat = Arc::new(move |x, xp| {
        (tb.u_bar)(x, xp).transpose() * b(&tb.phi.value(x), &tb.phi.value(xp))
    });
    let e_hat = approx.e.clone().map(|e| {
        let t = t.clone();
        Arc::new(move |x: &Vector, xp: &Vector| {
            let dj = t.dj_phi.eval(x, xp).unwrap_or_else(|_| Matrix::from_element(t.phi.out_dim, t.phi.in_dim, f64::NAN));
            (t.u_bar)(x, xp).transpose() * e(&t.phi.value(x), &t.phi.value(xp)) * dj
        }) as TwoPointMat
    });
    ConsistentApprox {
        e: e_hat,
        j: sandwich(approx.j.clone()),
        r: sandwich(approx.r.clone()),
        b: b_hat,
        z: None,
        modes: approx.modes.clone(),
    }
}
