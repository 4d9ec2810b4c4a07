//! Explicit-scheme evolution of homogeneous flows and their analytic
//! separable solutions.
//!
//! For an initial condition f that is a nonlinear eigenfunction, P(f) = λf,
//! the flow ψ_t = P(ψ) has the separable solution ψ(t) = a(t)·f with the
//! decay profile a(t) = [(1+(2−p)λt)^+]^{1/(2−p)}; it reaches steady state at
//! the extinction time T = −1/(λ(2−p)). [`synth_eigenflow`] generates that
//! solution exactly and stands in for numerically computed eigenfunctions
//! throughout the tests.

use crate::error::{Error, Result};
use crate::operators::{rayleigh_step_factor, HomogeneousOperator};
use crate::signal::GridSignal;

/// Parameters of a separable flow: eigenvalue, homogeneity, input power.
#[derive(Clone, Copy, Debug)]
pub struct FlowParams {
    /// Nonlinear eigenvalue λ ≤ 0 (the spectrum of −P is nonpositive).
    pub lambda: f64,
    /// Homogeneity p ∈ [1, 2) of the functional.
    pub p: f64,
    /// Squared norm ‖f‖² of the initial condition.
    pub f_norm_sq: f64,
}

impl FlowParams {
    pub fn new(lambda: f64, p: f64, f_norm_sq: f64) -> Result<Self> {
        if lambda > 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidParam(format!("lambda must be nonpositive, got {lambda}")));
        }
        if !(1.0..2.0).contains(&p) {
            return Err(Error::InvalidParam(format!("p must be in [1, 2), got {p}")));
        }
        if !(f_norm_sq > 0.0 && f_norm_sq.is_finite()) {
            return Err(Error::InvalidParam(format!("f_norm_sq must be positive, got {f_norm_sq}")));
        }
        Ok(Self { lambda, p, f_norm_sq })
    }
}

/// Ordered snapshots ψ_0..ψ_N with the time increments dt_k between them.
#[derive(Clone, Debug)]
pub struct SnapshotSequence {
    snapshots: Vec<GridSignal>,
    dts: Vec<f64>,
    uniform: bool,
    /// Set when the flow hit steady state (or exact extinction) before the
    /// requested number of steps; the sequence is the valid prefix.
    pub early_extinction: bool,
}

impl SnapshotSequence {
    /// Uniformly sampled sequence with constant step `dt`.
    pub fn uniform(snapshots: Vec<GridSignal>, dt: f64) -> Result<Self> {
        let n = snapshots.len();
        if n == 0 {
            return Err(Error::EmptyData("no snapshots"));
        }
        let dts = vec![dt; n - 1];
        Self::with_dts(snapshots, dts)
    }

    /// Sequence with explicit per-step increments.
    pub fn with_dts(snapshots: Vec<GridSignal>, dts: Vec<f64>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::EmptyData("no snapshots"));
        }
        if dts.len() + 1 != snapshots.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} snapshots need {} steps, got {}",
                snapshots.len(),
                snapshots.len() - 1,
                dts.len()
            )));
        }
        let first = &snapshots[0];
        if !snapshots.iter().all(|s| s.same_shape(first)) {
            return Err(Error::ShapeMismatch("snapshots differ in shape".into()));
        }
        if !dts.iter().all(|&dt| dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParam("all dt_k must be positive".into()));
        }
        let uniform = match dts.first() {
            None => true,
            Some(&dt0) => dts.iter().all(|&dt| (dt - dt0).abs() <= 1e-12 * dt0.abs()),
        };
        Ok(Self { snapshots, dts, uniform, early_extinction: false })
    }

    pub fn snapshots(&self) -> &[GridSignal] {
        &self.snapshots
    }

    pub fn dts(&self) -> &[f64] {
        &self.dts
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Number of snapshots (N+1).
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// The constant step of a uniform sequence.
    pub fn uniform_dt(&self) -> Result<f64> {
        if !self.uniform {
            return Err(Error::NonUniform);
        }
        Ok(self.dts.first().copied().unwrap_or(0.0))
    }

    /// Cumulative sampling times t_0 = 0, t_k = Σ_{i<k} dt_i.
    pub fn times(&self) -> Vec<f64> {
        let mut t = Vec::with_capacity(self.snapshots.len());
        t.push(0.0);
        let mut acc = 0.0;
        for &dt in &self.dts {
            acc += dt;
            t.push(acc);
        }
        t
    }

    /// Reinterpret the snapshots as uniformly spaced with step `dt`,
    /// discarding the recorded increments. This is how adaptively stepped
    /// data enters DMD: in rescaled time the samples are uniform.
    pub fn reindexed_uniform(&self, dt: f64) -> Result<Self> {
        let mut seq = Self::uniform(self.snapshots.clone(), dt)?;
        seq.early_extinction = self.early_extinction;
        Ok(seq)
    }

    /// Keep only the first `count` snapshots (and their steps).
    pub fn truncated(&self, count: usize) -> Result<Self> {
        if count == 0 || count > self.snapshots.len() {
            return Err(Error::InvalidParam(format!("cannot truncate to {count} snapshots")));
        }
        let mut seq = Self::with_dts(
            self.snapshots[..count].to_vec(),
            self.dts[..count - 1].to_vec(),
        )?;
        seq.early_extinction = self.early_extinction;
        Ok(seq)
    }
}

/// The decay profile a(t) = [(1+(2−p)λt)^+]^{1/(2−p)}.
///
/// a(0) = 1; identically 1 for λ = 0; exactly 0 past the extinction time.
pub fn decay_profile(t: f64, params: &FlowParams) -> Result<f64> {
    if !(1.0..2.0).contains(&params.p) {
        return Err(Error::InvalidParam(format!("decay profile needs p in [1, 2), got {}", params.p)));
    }
    let q = 2.0 - params.p;
    let base = 1.0 + q * params.lambda * t;
    if base <= 0.0 {
        return Ok(0.0);
    }
    Ok(base.powf(1.0 / q))
}

/// Extinction time T = −1/(λ(2−p)); infinite for λ = 0.
pub fn extinction_time(params: &FlowParams) -> f64 {
    if params.lambda == 0.0 {
        return f64::INFINITY;
    }
    -1.0 / (params.lambda * (2.0 - params.p))
}

/// Explicit scheme ψ_{k+1} = ψ_k + P(ψ_k)·dt with a fixed step.
///
/// Stability is the caller's responsibility; a non-finite state aborts with
/// the step index.
pub fn evolve_fixed(
    f: &GridSignal,
    op: &dyn HomogeneousOperator,
    dt: f64,
    steps: usize,
) -> Result<SnapshotSequence> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParam(format!("dt must be positive, got {dt}")));
    }
    let mut snapshots = Vec::with_capacity(steps + 1);
    snapshots.push(f.clone());
    let mut psi = f.clone();
    for k in 0..steps {
        let p_psi = op.apply(&psi)?;
        psi.axpy(dt, &p_psi);
        if !psi.is_finite() {
            return Err(Error::Divergence { step: k });
        }
        snapshots.push(psi.clone());
    }
    SnapshotSequence::uniform(snapshots, dt)
}

/// Explicit scheme with the adaptive step dt_k = −⟨P(ψ_k),ψ_k⟩/‖P(ψ_k)‖²·δ.
///
/// Hitting steady state (‖P(ψ_k)‖ = 0 or a vanishing step) truncates the
/// sequence and sets `early_extinction` instead of failing.
pub fn evolve_adaptive(
    f: &GridSignal,
    op: &dyn HomogeneousOperator,
    delta: f64,
    steps: usize,
) -> Result<SnapshotSequence> {
    if !(delta > 0.0 && delta < 2.0) {
        return Err(Error::InvalidParam(format!("delta must be in (0, 2), got {delta}")));
    }
    let mut snapshots = Vec::with_capacity(steps + 1);
    let mut dts = Vec::with_capacity(steps);
    snapshots.push(f.clone());
    let mut psi = f.clone();
    let mut extinct = false;
    for k in 0..steps {
        let p_psi = op.apply(&psi)?;
        let dt = match rayleigh_step_factor(&p_psi, &psi) {
            Ok(factor) => factor * delta,
            Err(Error::SteadyState) => {
                extinct = true;
                break;
            }
            Err(e) => return Err(e),
        };
        if dt <= 0.0 {
            // a vanishing Rayleigh factor means no dissipative direction left
            extinct = true;
            break;
        }
        psi.axpy(dt, &p_psi);
        if !psi.is_finite() {
            return Err(Error::Divergence { step: k });
        }
        snapshots.push(psi.clone());
        dts.push(dt);
    }
    let mut seq = SnapshotSequence::with_dts(snapshots, dts)?;
    seq.early_extinction = extinct;
    Ok(seq)
}

/// Sampling policy for [`synth_eigenflow`].
#[derive(Clone, Copy, Debug)]
pub enum Sampling {
    /// Uniform physical time steps: ψ_k = a(k·dt)·f.
    Uniform { dt: f64, snapshots: usize },
    /// Geometric sampling t_k = (|1−δ|^{k(2−p)} − 1)/(λ(2−p)):
    /// ψ_k = |1−δ|^k·f, the rescaled-time analogue of a fixed step.
    Adaptive { delta: f64, snapshots: usize },
}

/// Exact separable solution ψ(t) = a(t)·f of a flow started at an
/// eigenfunction, sampled uniformly or at the geometric time points.
///
/// This generator replaces numerically computed eigenfunctions as ground
/// truth: every quantity is evaluated in closed form.
pub fn synth_eigenflow(
    f: &GridSignal,
    params: &FlowParams,
    sampling: Sampling,
) -> Result<SnapshotSequence> {
    match sampling {
        Sampling::Uniform { dt, snapshots } => {
            if snapshots == 0 {
                return Err(Error::EmptyData("no snapshots requested"));
            }
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidParam(format!("dt must be positive, got {dt}")));
            }
            let states = (0..snapshots)
                .map(|k| Ok(f.scaled(decay_profile(k as f64 * dt, params)?)))
                .collect::<Result<Vec<_>>>()?;
            SnapshotSequence::uniform(states, dt)
        }
        Sampling::Adaptive { delta, snapshots } => {
            if snapshots == 0 {
                return Err(Error::EmptyData("no snapshots requested"));
            }
            if !(delta > 0.0 && delta < 2.0) {
                return Err(Error::InvalidParam(format!("delta must be in (0, 2), got {delta}")));
            }
            if params.lambda == 0.0 {
                // steady flow: adaptive time points are undefined
                let mut seq = SnapshotSequence::uniform(vec![f.clone()], 0.0)?;
                seq.early_extinction = true;
                return Ok(seq);
            }
            let q = 2.0 - params.p;
            let ratio = (1.0 - delta).abs();
            let time_at = |k: usize| (ratio.powf(k as f64 * q) - 1.0) / (params.lambda * q);
            let count = if ratio == 0.0 { snapshots.min(2) } else { snapshots };
            let states: Vec<GridSignal> =
                (0..count).map(|k| f.scaled(ratio.powi(k as i32))).collect();
            let dts: Vec<f64> =
                (0..count - 1).map(|k| time_at(k + 1) - time_at(k)).collect();
            let mut seq = SnapshotSequence::with_dts(states, dts)?;
            seq.early_extinction = ratio == 0.0 && snapshots > 2;
            Ok(seq)
        }
    }
}

/// Operator with a prescribed eigenfunction: P(a·f) = λ·a|a|^{p−2}·f.
///
/// States are projected onto the ray of `f` first, so along a separable flow
/// this behaves exactly like a (p−1)-homogeneous operator with eigenpair
/// (f, λ). It drives the prior pipeline wherever the experiments call for an
/// eigenfunction initial condition that no numerical generator provides.
#[derive(Clone, Debug)]
pub struct SeparableOperator {
    f: GridSignal,
    lambda: f64,
    p: f64,
}

impl SeparableOperator {
    pub fn new(f: GridSignal, lambda: f64, p: f64) -> Result<Self> {
        if f.norm_sq() == 0.0 {
            return Err(Error::EmptyData("eigenfunction must be nonzero"));
        }
        if lambda > 0.0 {
            return Err(Error::InvalidParam(format!("lambda must be nonpositive, got {lambda}")));
        }
        if !(1.0..2.0).contains(&p) {
            return Err(Error::InvalidParam(format!("p must be in [1, 2), got {p}")));
        }
        Ok(Self { f, lambda, p })
    }
}

impl HomogeneousOperator for SeparableOperator {
    fn apply(&self, psi: &GridSignal) -> Result<GridSignal> {
        if !psi.same_shape(&self.f) {
            return Err(Error::ShapeMismatch("state does not match eigenfunction shape".into()));
        }
        let a = psi.inner(&self.f) / self.f.norm_sq();
        if a == 0.0 {
            return Ok(psi.zeros_like());
        }
        let factor = self.lambda * a * a.abs().powf(self.p - 2.0);
        Ok(self.f.scaled(factor))
    }

    fn homogeneity(&self) -> f64 {
        self.p
    }
}
