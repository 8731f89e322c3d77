//! Crate-wide error type.

use thiserror::Error;

/// Failures raised by the numerics, the steppers and the structure tools.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("discrete Jacobian is singular (smallest singular value {sigma_min:e})")]
    SingularDiscreteJacobian { sigma_min: f64 },

    #[error("upper-left block E11 is singular (smallest singular value {sigma_min:e})")]
    SingularE11 { sigma_min: f64 },

    #[error("singular matrix in {0}")]
    SingularMatrix(String),

    #[error("Newton iteration did not converge: {iterations} iterations, residual {residual_norm:e}")]
    NonConvergence {
        iterations: usize,
        residual_norm: f64,
        best: Vec<f64>,
    },

    #[error("state left the model's validity domain: {0}")]
    DomainExit(String),

    #[error("discrete gradient is not in the column space of the transposed descriptor matrix (least-squares residual {residual:e})")]
    ColspaceUnsolvable { residual: f64 },

    #[error("numerical rank is ambiguous: singular value ratio {ratio:e} lies in the ambiguity band")]
    RankAmbiguous { ratio: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("model definition error: {0}")]
    ModelDefinition(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(context: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context: context.to_string(),
            expected,
            got,
        })
    }
}
