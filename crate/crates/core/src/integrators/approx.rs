use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::calculus::{MatrixFn, VectorFn};
use crate::error::{Error, Result};
use crate::models::{PhdaeSystem, SemiExplicitPhdae, TwoPointMat};
use crate::numerics::{symmetric_min_eigenvalue, Matrix, Vector};

pub type TwoPointVec = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;
pub type FallibleTwoPointMat = Arc<dyn Fn(&Vector, &Vector) -> Result<Matrix> + Send + Sync>;
pub type FallibleTwoPointVec = Arc<dyn Fn(&Vector, &Vector) -> Result<Vector> + Send + Sync>;

/// Where a one-point coefficient is sampled on a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxMode {
    Midpoint,
    Left,
    Right,
    Custom,
}

impl ApproxMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(Self::Midpoint),
            "left" => Ok(Self::Left),
            "right" => Ok(Self::Right),
            other => Err(Error::Config(format!("unknown coefficient mode '{other}'"))),
        }
    }

    pub fn point(self, x: &Vector, xp: &Vector) -> Vector {
        match self {
            ApproxMode::Left => x.clone(),
            ApproxMode::Right => xp.clone(),
            ApproxMode::Midpoint | ApproxMode::Custom => (x + xp) * 0.5,
        }
    }
}

pub fn sample_mat(f: MatrixFn, mode: ApproxMode) -> TwoPointMat {
    Arc::new(move |x, xp| f(&mode.point(x, xp)))
}

pub fn sample_vec(f: VectorFn, mode: ApproxMode) -> TwoPointVec {
    Arc::new(move |x, xp| f(&mode.point(x, xp)))
}

/// Two-point approximations of the system coefficients.
///
/// `e` is `Ē` for the DDR scheme and `Ē₁₁` for the semi-explicit scheme; `z`
/// is `z̄₂` for the semi-explicit scheme. The DGP scheme takes `Ē` and `z̄`
/// from its discrete gradient pair instead.
#[derive(Clone)]
pub struct ConsistentApprox {
    pub e: Option<TwoPointMat>,
    pub j: TwoPointMat,
    pub r: TwoPointMat,
    pub b: TwoPointMat,
    pub z: Option<TwoPointVec>,
    pub modes: BTreeMap<String, ApproxMode>,
}

impl fmt::Debug for ConsistentApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConsistentApprox").field("modes", &self.modes).finish()
    }
}

fn uniform_modes(names: &[&str], mode: ApproxMode) -> BTreeMap<String, ApproxMode> {
    names.iter().map(|n| (n.to_string(), mode)).collect()
}

impl ConsistentApprox {
    /// All coefficients of a general system sampled with one mode.
    pub fn for_system(sys: &PhdaeSystem, mode: ApproxMode) -> Self {
        Self {
            e: Some(sample_mat(sys.e.clone(), mode)),
            j: sample_mat(sys.j.clone(), mode),
            r: sample_mat(sys.r.clone(), mode),
            b: sample_mat(sys.b.clone(), mode),
            z: Some(sample_vec(sys.z.clone(), mode)),
            modes: uniform_modes(&["E", "J", "R", "B", "z"], mode),
        }
    }

    /// `Ē₁₁`, `J̄`, `R̄`, `B̄`, `z̄₂` of a semi-explicit system sampled with one mode.
    pub fn for_semi_explicit(se: &SemiExplicitPhdae, mode: ApproxMode) -> Self {
        Self {
            e: Some(sample_mat(se.e11.clone(), mode)),
            j: sample_mat(se.j.clone(), mode),
            r: sample_mat(se.r.clone(), mode),
            b: sample_mat(se.b.clone(), mode),
            z: Some(sample_vec(se.z2.clone(), mode)),
            modes: uniform_modes(&["E", "J", "R", "B", "z"], mode),
        }
    }

    /// Replace one coefficient evaluator; `name` is one of `E, J, R, B`.
    pub fn with_matrix(mut self, name: &str, f: TwoPointMat, mode: ApproxMode) -> Result<Self> {
        match name {
            "E" => self.e = Some(f),
            "J" => self.j = f,
            "R" => self.r = f,
            "B" => self.b = f,
            other => return Err(Error::Config(format!("unknown coefficient '{other}'"))),
        }
        self.modes.insert(name.to_string(), mode);
        Ok(self)
    }

    pub fn with_z(mut self, f: TwoPointVec, mode: ApproxMode) -> Self {
        self.z = Some(f);
        self.modes.insert("z".into(), mode);
        self
    }

    pub fn jr(&self, x: &Vector, xp: &Vector) -> Matrix {
        (self.j)(x, xp) - (self.r)(x, xp)
    }

    /// Largest skew and PSD defects of `J̄`, `R̄` over the given point pairs.
    pub fn structure_defect(&self, pairs: &[(Vector, Vector)]) -> f64 {
        pairs
            .iter()
            .map(|(x, xp)| {
                let j = (self.j)(x, xp);
                let r = (self.r)(x, xp);
                let skew = (&j + j.transpose()).amax();
                let asym = (&r - r.transpose()).amax();
                skew.max(asym).max(-symmetric_min_eigenvalue(&r))
            })
            .fold(0.0, f64::max)
    }
}

/// Two-point `(Ē, z̄)` with `z̄ᵀĒ(x′−x) = H(x′)−H(x)`.
#[derive(Clone)]
pub struct DiscreteGradientPair {
    pub n: usize,
    pub e_bar: FallibleTwoPointMat,
    pub z_bar: FallibleTwoPointVec,
}

impl fmt::Debug for DiscreteGradientPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteGradientPair").field("n", &self.n).finish()
    }
}

impl DiscreteGradientPair {
    pub fn e(&self, x: &Vector, xp: &Vector) -> Result<Matrix> {
        (self.e_bar)(x, xp)
    }

    pub fn z(&self, x: &Vector, xp: &Vector) -> Result<Vector> {
        (self.z_bar)(x, xp)
    }

    /// `|z̄ᵀĒ(x′−x) − (H(x′)−H(x))|`.
    pub fn directionality_defect(
        &self,
        h: &crate::calculus::ScalarField,
        x: &Vector,
        xp: &Vector,
    ) -> Result<f64> {
        let lhs = self.z(x, xp)?.dot(&(self.e(x, xp)? * (xp - x)));
        Ok((lhs - (h.value(xp) - h.value(x))).abs())
    }
}
