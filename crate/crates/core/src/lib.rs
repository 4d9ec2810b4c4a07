//! Decomposition of homogeneous gradient flows into orthogonal nonlinear
//! spectral modes.
//!
//! Flows ψ_t = P(ψ) of absolutely p-homogeneous functionals (the p-Dirichlet
//! energy and its p-Laplacian in particular) reach steady state in finite
//! time, which a plain exponential fit such as DMD cannot represent: the
//! fitting error vanishes with the step size while the reconstruction error
//! stays bounded below. Rescaling the time axis by the generalized Rayleigh
//! factor — adaptively while evolving, or after the fact from the snapshots
//! alone — turns any such flow into an exponentially decaying one, which a
//! symmetric DMD then decomposes exactly into orthonormal modes that
//! approximate nonlinear eigenfunctions.
//!
//! Module map:
//! - [`signal`]: grid signals and their inner-product algebra
//! - [`operators`]: p-Dirichlet energy, p-Laplacian, Rayleigh factor
//! - [`flow`]: explicit schemes, decay profiles, synthetic separable flows
//! - [`dmd`]: standard and symmetric DMD, Sylvester solver, reconstruction
//! - [`analytic`]: closed-form DMD solutions and the reconstruction-error bound
//! - [`rescale`]: known-operator and blind time rescaling, resampling
//! - [`orthons`]: the end-to-end decomposition, spectrum, filtering
//! - [`bench`]: noise-robustness and timing harnesses

pub mod analytic;
pub mod bench;
pub mod dmd;
pub mod error;
pub mod flow;
pub mod operators;
pub mod orthons;
pub mod rescale;
pub mod signal;

pub use error::{Error, Result};
pub use signal::{GridDim, GridMeta, GridSignal};

pub use dmd::{DmdResult, RankPolicy};
pub use flow::{FlowParams, Sampling, SnapshotSequence};
pub use operators::{HomogeneousOperator, OperatorConfig, PLaplacian};
pub use orthons::OrthoNsDecomposition;
pub use rescale::TimeGrid;
