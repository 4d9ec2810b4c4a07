//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by flow evolution, decomposition, and rescaling.
#[derive(Debug, Error)]
pub enum Error {
    /// Input contains NaN or infinite entries.
    #[error("non-finite value in input: {0}")]
    NonFinite(&'static str),

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Shapes of two signals (or a signal and a matrix) do not match.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The state became non-finite during explicit evolution.
    #[error("flow diverged at step {step}")]
    Divergence { step: usize },

    /// The operator vanished: the flow is at steady state.
    #[error("steady state: operator norm is zero")]
    SteadyState,

    /// A step increases ⟨ψ_{k+1}−ψ_k, ψ_k⟩ ≥ 0, so no dissipative rescaling exists.
    #[error("non-dissipative step at index {step}")]
    NonDissipative { step: usize },

    /// Snapshot sequence is not uniformly sampled.
    #[error("sequence is not uniform: rescale and resample before DMD")]
    NonUniform,

    /// There is not enough data to decompose (empty matrix, single snapshot, zero Gram matrix).
    #[error("no data: {0}")]
    EmptyData(&'static str),

    /// The denominators of an eigenvalue formula vanish.
    #[error("undefined eigenvalue: {0}")]
    UndefinedEigenvalue(&'static str),

    /// Low-level linear algebra failure.
    #[error("linear algebra error: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
