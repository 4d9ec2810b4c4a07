//! Closed-form solutions for DMD on separable flows.
//!
//! These are the reference values the rest of the crate is tested against:
//! the rank-1 DMD solution on decay data, the continuous-limit eigenvalue,
//! the lower bound of the reconstruction error that makes densifying the
//! sampling futile, and the quadrature for the continuous reconstruction
//! error itself.

use crate::error::{Error, Result};
use crate::flow::{decay_profile, extinction_time, FlowParams};

/// Rank-1 DMD of separable data ψ_k = a_k·f in closed form.
#[derive(Clone, Copy, Debug)]
pub struct AnalyticDmdRank1 {
    /// DMD eigenvalue μ = ⟨a_1^N, a_0^{N−1}⟩ / ‖a_0^{N−1}‖².
    pub mu: f64,
    /// The mode is f/‖f‖: this is the 1/‖f‖ factor.
    pub phi_scale: f64,
    /// Coordinate α = ‖f‖.
    pub alpha: f64,
    /// Fitting error ‖a_1^N‖² − ⟨a_1^N, a_0^{N−1}⟩²/‖a_0^{N−1}‖², in decay
    /// units: the Frobenius error of the ψ-data is ‖f‖² times this.
    pub err_dmd: f64,
}

/// Closed-form DMD of rank-1 data ψ_k = a_k·f, given the decay vector
/// (a_0, …, a_N) with a_0 = 1 and the norm of f.
pub fn analytic_dmd_rank1(a: &[f64], f_norm: f64) -> Result<AnalyticDmdRank1> {
    if a.len() < 2 {
        return Err(Error::EmptyData("decay vector needs at least two entries"));
    }
    if (a[0] - 1.0).abs() > 1e-14 {
        return Err(Error::InvalidParam(format!("a_0 must be 1, got {}", a[0])));
    }
    if !(f_norm > 0.0 && f_norm.is_finite()) {
        return Err(Error::InvalidParam(format!("f_norm must be positive, got {f_norm}")));
    }
    let head = &a[..a.len() - 1];
    let tail = &a[1..];
    let ip: f64 = tail.iter().zip(head).map(|(y, x)| y * x).sum();
    let head_sq: f64 = head.iter().map(|x| x * x).sum();
    let tail_sq: f64 = tail.iter().map(|x| x * x).sum();
    Ok(AnalyticDmdRank1 {
        mu: ip / head_sq,
        phi_scale: 1.0 / f_norm,
        alpha: f_norm,
        err_dmd: tail_sq - ip * ip / head_sq,
    })
}

/// Continuous-limit DMD eigenvalue μ̃ = λ(4−p)/2 of uniformly sampled decay
/// data as dt → 0. Evaluates the formula for any p; at p = 2 it returns λ,
/// the linear case.
pub fn limit_mu_tilde(lambda: f64, p: f64) -> f64 {
    lambda * (4.0 - p) / 2.0
}

/// Lower bound B on the continuous reconstruction error of uniformly sampled
/// DMD: B = −‖f‖²·(1/(λ(4−p)))·[1 − sqrt(1 − e^{−(4−p)/(2−p)})]² > 0.
pub fn paradox_bound(f_norm_sq: f64, lambda: f64, p: f64) -> Result<f64> {
    if lambda >= 0.0 {
        return Err(Error::InvalidParam(format!("bound requires lambda < 0, got {lambda}")));
    }
    if !(1.0..2.0).contains(&p) {
        return Err(Error::InvalidParam(format!("p must be in [1, 2), got {p}")));
    }
    if !(f_norm_sq > 0.0) {
        return Err(Error::InvalidParam(format!("f_norm_sq must be positive, got {f_norm_sq}")));
    }
    let ratio = (4.0 - p) / (2.0 - p);
    let bracket = 1.0 - (1.0 - (-ratio).exp()).sqrt();
    Ok(-f_norm_sq / (lambda * (4.0 - p)) * bracket * bracket)
}

/// Continuous reconstruction error ∫_0^{T_ext} ‖f‖²(a(t) − e^{μ̃t})² dt by
/// composite trapezoid with `nodes` intervals (at least 1000; default 1e5 in
/// callers). The upper limit is the extinction time, where a vanishes
/// exactly.
pub fn err_rec_continuous(
    params: &FlowParams,
    mu_tilde: f64,
    nodes: usize,
) -> Result<f64> {
    if nodes < 1000 {
        return Err(Error::InvalidParam(format!("need at least 1000 quadrature nodes, got {nodes}")));
    }
    if params.lambda >= 0.0 {
        return Err(Error::InvalidParam("err_rec_continuous requires lambda < 0".into()));
    }
    let t_ext = extinction_time(params);
    let dt = t_ext / nodes as f64;
    let integrand = |t: f64| -> Result<f64> {
        let a = decay_profile(t, params)?;
        let d = a - (mu_tilde * t).exp();
        Ok(d * d)
    };
    let mut sum = 0.5 * (integrand(0.0)? + integrand(t_ext)?);
    for k in 1..nodes {
        sum += integrand(k as f64 * dt)?;
    }
    Ok(params.f_norm_sq * sum * dt)
}
