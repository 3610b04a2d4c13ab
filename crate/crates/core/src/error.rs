use crate::core_model::BasisKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("basis mismatch: {left:?} vs {right:?}")]
    BasisMismatch { left: BasisKind, right: BasisKind },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    /// A trigonometric denominator vanished; `factor` names it.
    #[error("pole: {factor} = {magnitude:e} is too close to zero")]
    Pole { factor: String, magnitude: f64 },

    #[error("recurrence coefficient a[{step}] vanishes")]
    DegenerateRecurrence { step: usize },

    #[error("tridiagonal eigensolver did not converge in block {start}..{end} after {iterations} iterations")]
    NoConvergence {
        start: usize,
        end: usize,
        iterations: usize,
    },

    #[error("unreduced block {start}..{end} has a repeated eigenvalue {value}")]
    DegenerateSpectrum { start: usize, end: usize, value: f64 },

    #[error("ansatz expects {expected} roots, got {got}")]
    RootCount { expected: usize, got: usize },

    #[error("ansatz not admissible: {0}")]
    Inadmissible(String),
}

impl Error {
    pub(crate) fn pole(factor: impl Into<String>, magnitude: f64) -> Self {
        Error::Pole {
            factor: factor.into(),
            magnitude,
        }
    }
}
