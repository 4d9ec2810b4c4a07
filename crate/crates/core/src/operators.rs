//! Discrete absolutely p-homogeneous functionals and their gradient operators.
//!
//! The p-Dirichlet energy R(ψ) = (1/p) Σ |∇ψ|_eps^p h^d is discretized with
//! forward-difference gradients and Neumann (replicated ghost cell) boundaries.
//! The p-Laplacian here is the exact negative gradient of that discrete energy,
//! i.e. divergence is the adjoint backward difference and the operator carries
//! the h^d cell weight of the energy. For h = 1 and p = 2 this reduces to the
//! standard 3-point / 5-point Neumann Laplacian.
//!
//! The gradient magnitude is regularized as |∇ψ|_eps = sqrt(|∇ψ|² + eps²) − eps,
//! which vanishes where the gradient vanishes and keeps the operator smooth at
//! ∇ψ = 0 for p < 2. Homogeneity R(aψ) = |a|^p R(ψ) and
//! P(aψ) = a|a|^{p−2} P(ψ) are exact at eps = 0.

use crate::error::{Error, Result};
use crate::signal::GridSignal;

/// Configuration of the p-Dirichlet functional and its gradient operator.
///
/// `p` is the homogeneity of the functional, `eps` the gradient-magnitude
/// regularization. Boundaries are always Neumann.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorConfig {
    pub p: f64,
    pub eps: f64,
}

impl OperatorConfig {
    /// Validated config. `p` must lie in [1, 2]; p = 2 is the linear
    /// (heat equation) end point, admitted for sanity checks even though
    /// the decay-profile formulas require p < 2.
    pub fn new(p: f64, eps: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&p) {
            return Err(Error::InvalidParam(format!("p must be in [1, 2], got {p}")));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParam(format!("eps must be nonnegative, got {eps}")));
        }
        Ok(Self { p, eps })
    }
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self { p: 1.5, eps: 1e-8 }
    }
}

/// Gradient operator of an absolutely p-homogeneous functional, P = −∂R.
///
/// Implementors evaluate P(ψ) on a grid signal without changing its shape.
/// All provided implementations are pure and safe to share across threads.
pub trait HomogeneousOperator: Sync {
    /// Evaluate P(ψ). The result has the shape of `psi`.
    fn apply(&self, psi: &GridSignal) -> Result<GridSignal>;

    /// Homogeneity order p of the underlying functional (P itself is
    /// (p−1)-homogeneous).
    fn homogeneity(&self) -> f64;
}

/// The discretized p-Laplacian, P(ψ) = div(|∇ψ|_eps^{p−2} ∇ψ).
#[derive(Clone, Copy, Debug)]
pub struct PLaplacian {
    pub cfg: OperatorConfig,
}

impl PLaplacian {
    pub fn new(cfg: OperatorConfig) -> Self {
        Self { cfg }
    }
}

impl HomogeneousOperator for PLaplacian {
    fn apply(&self, psi: &GridSignal) -> Result<GridSignal> {
        p_laplacian(psi, &self.cfg)
    }

    fn homogeneity(&self) -> f64 {
        self.cfg.p
    }
}

/// Forward differences (ψ[c+e]−ψ[c])/h per axis; zero at the far boundary
/// (Neumann ghost replication). Returns (gx, gy) flattened row-major.
fn forward_gradient(psi: &GridSignal) -> (Vec<f64>, Vec<f64>) {
    let v = psi.values();
    let (rows, cols) = v.dim();
    let h = psi.spacing();
    let mut gx = vec![0.0; rows * cols];
    let mut gy = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let idx = i * cols + j;
            if j + 1 < cols {
                gx[idx] = (v[(i, j + 1)] - v[(i, j)]) / h;
            }
            if i + 1 < rows {
                gy[idx] = (v[(i + 1, j)] - v[(i, j)]) / h;
            }
        }
    }
    (gx, gy)
}

/// The p-Dirichlet energy R(ψ) = (1/p) Σ_cells (sqrt(|∇ψ|²+eps²)−eps)^p h^d.
pub fn p_dirichlet_energy(psi: &GridSignal, cfg: &OperatorConfig) -> Result<f64> {
    if !psi.is_finite() {
        return Err(Error::NonFinite("p_dirichlet_energy input"));
    }
    let (gx, gy) = forward_gradient(psi);
    let hd = psi.meta().cell_volume();
    let mut sum = 0.0;
    for (a, b) in gx.iter().zip(&gy) {
        let mag = (a * a + b * b + cfg.eps * cfg.eps).sqrt() - cfg.eps;
        sum += mag.powf(cfg.p);
    }
    Ok(sum * hd / cfg.p)
}

/// The discrete p-Laplacian P(ψ): the exact negative gradient of
/// [`p_dirichlet_energy`] under the unweighted inner product.
pub fn p_laplacian(psi: &GridSignal, cfg: &OperatorConfig) -> Result<GridSignal> {
    if !psi.is_finite() {
        return Err(Error::NonFinite("p_laplacian input"));
    }
    let (gx, gy) = forward_gradient(psi);
    let (rows, cols) = psi.values().dim();
    let h = psi.spacing();
    let hd = psi.meta().cell_volume();

    // flux_a = (m−eps)^{p−1} / m · g_a with m = sqrt(|∇ψ|²+eps²)
    let mut fx = vec![0.0; rows * cols];
    let mut fy = vec![0.0; rows * cols];
    for idx in 0..rows * cols {
        let m = (gx[idx] * gx[idx] + gy[idx] * gy[idx] + cfg.eps * cfg.eps).sqrt();
        if m == 0.0 {
            continue;
        }
        let w = (m - cfg.eps).powf(cfg.p - 1.0) / m;
        fx[idx] = w * gx[idx];
        fy[idx] = w * gy[idx];
    }

    // backward-difference divergence, ghost flux 0 below the low boundary
    let mut out = psi.zeros_like();
    {
        let o = out.values_mut();
        for i in 0..rows {
            for j in 0..cols {
                let idx = i * cols + j;
                let dx = fx[idx] - if j > 0 { fx[idx - 1] } else { 0.0 };
                let dy = fy[idx] - if i > 0 { fy[idx - cols] } else { 0.0 };
                o[(i, j)] = hd * (dx + dy) / h;
            }
        }
    }
    Ok(out)
}

/// Generalized Rayleigh step factor λ_ψ^{-1} = −⟨P(ψ), ψ⟩ / ‖P(ψ)‖².
///
/// Returns [`Error::SteadyState`] when ‖P(ψ)‖ = 0; the caller must stop the
/// flow there.
pub fn rayleigh_step_factor(p_psi: &GridSignal, psi: &GridSignal) -> Result<f64> {
    let denom = p_psi.norm_sq();
    if denom == 0.0 {
        return Err(Error::SteadyState);
    }
    Ok(-p_psi.inner(psi) / denom)
}
