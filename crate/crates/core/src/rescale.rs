//! Time-axis re-parametrization of snapshot sequences.
//!
//! Factoring the step by the Rayleigh factor maps any homogeneous flow onto a
//! one-homogeneous (exponentially decaying) one. With the operator known the
//! mapping is dt̃_k = −(‖P(ψ_k)‖²/⟨P(ψ_k),ψ_k⟩)·dt_k; blind, it needs only
//! snapshot differences: dt̃_k = −‖ψ_{k+1}−ψ_k‖²/⟨ψ_{k+1}−ψ_k, ψ_k⟩. On data
//! from the explicit scheme the two coincide identically, because
//! ψ_{k+1}−ψ_k = P(ψ_k)·dt_k.

use crate::error::{Error, Result};
use crate::flow::SnapshotSequence;
use crate::operators::HomogeneousOperator;
use crate::signal::GridSignal;

/// Rescaled time points t̃_0 = 0 < t̃_1 < … associated with the snapshots.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    /// Index at which a vanishing operator (steady state) cut the grid
    /// short, if any.
    pub truncated_at: Option<usize>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times[0] != 0.0 {
            return Err(Error::InvalidParam("time grid must start at 0".into()));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidParam("time grid must be strictly increasing".into()));
        }
        Ok(Self { times, truncated_at: None })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn span(&self) -> f64 {
        *self.times.last().expect("grid non-empty")
    }

    /// Steps dt̃_k between consecutive grid points.
    pub fn steps(&self) -> Vec<f64> {
        self.times.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Policy for steps whose inner product ⟨ψ_{k+1}−ψ_k, ψ_k⟩ is nonnegative
/// (noise can flip the sign on real data).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NonDissipativePolicy {
    /// Fail with the offending index.
    #[default]
    Error,
    /// Reuse the previous rescaled step.
    ClampToPrevious,
}

/// Rescale with the operator known: dt̃_k = −(‖P(ψ_k)‖²/⟨P(ψ_k),ψ_k⟩)·dt_k.
///
/// A vanishing operator truncates the grid at that index (steady state).
pub fn rescale_known(
    seq: &SnapshotSequence,
    op: &dyn HomogeneousOperator,
) -> Result<TimeGrid> {
    let mut times = Vec::with_capacity(seq.len());
    times.push(0.0);
    let mut truncated = None;
    for (k, (snap, &dt)) in seq.snapshots().iter().zip(seq.dts()).enumerate() {
        let p_psi = op.apply(snap)?;
        let norm_sq = p_psi.norm_sq();
        let ip = p_psi.inner(snap);
        if norm_sq == 0.0 || ip >= 0.0 {
            truncated = Some(k);
            break;
        }
        times.push(times[k] - norm_sq / ip * dt);
    }
    if times.len() < 2 {
        let mut grid = TimeGrid { times, truncated_at: truncated };
        grid.truncated_at = truncated.or(Some(0));
        return Ok(grid);
    }
    let mut grid = TimeGrid::new(times)?;
    grid.truncated_at = truncated;
    Ok(grid)
}

/// Blind rescaling from snapshots alone:
/// dt̃_k = −‖ψ_{k+1}−ψ_k‖²/⟨ψ_{k+1}−ψ_k, ψ_k⟩.
pub fn rescale_blind(seq: &SnapshotSequence) -> Result<TimeGrid> {
    rescale_blind_with_policy(seq, NonDissipativePolicy::default())
}

/// Blind rescaling with an explicit non-dissipative-step policy.
pub fn rescale_blind_with_policy(
    seq: &SnapshotSequence,
    policy: NonDissipativePolicy,
) -> Result<TimeGrid> {
    let snaps = seq.snapshots();
    let mut times = Vec::with_capacity(snaps.len());
    times.push(0.0);
    let mut truncated = None;
    let mut prev_step: Option<f64> = None;
    for k in 0..snaps.len() - 1 {
        let mut diff = snaps[k + 1].clone();
        diff.axpy(-1.0, &snaps[k]);
        let norm_sq = diff.norm_sq();
        if norm_sq == 0.0 {
            // consecutive snapshots identical: steady state reached
            truncated = Some(k);
            break;
        }
        let ip = diff.inner(&snaps[k]);
        let step = if ip < 0.0 {
            -norm_sq / ip
        } else {
            match (policy, prev_step) {
                (NonDissipativePolicy::ClampToPrevious, Some(prev)) => prev,
                _ => return Err(Error::NonDissipative { step: k }),
            }
        };
        prev_step = Some(step);
        times.push(times[k] + step);
    }
    if times.len() < 2 {
        return Ok(TimeGrid { times, truncated_at: truncated.or(Some(0)) });
    }
    let mut grid = TimeGrid::new(times)?;
    grid.truncated_at = truncated;
    Ok(grid)
}

/// Pointwise linear interpolation of the snapshots at `samples` equispaced
/// points of the rescaled axis. Endpoints are reproduced exactly; the output
/// is uniform with dt̃ = t̃_N/(samples−1).
pub fn resample_uniform(
    seq: &SnapshotSequence,
    grid: &TimeGrid,
    samples: usize,
) -> Result<SnapshotSequence> {
    if samples < 2 {
        return Err(Error::InvalidParam(format!("need at least 2 samples, got {samples}")));
    }
    if grid.len() != seq.len() {
        return Err(Error::ShapeMismatch(format!(
            "grid has {} points for {} snapshots",
            grid.len(),
            seq.len()
        )));
    }
    let step = grid.span() / (samples - 1) as f64;
    let targets: Vec<f64> = (0..samples).map(|j| j as f64 * step).collect();
    let states = interpolate_snapshots(seq.snapshots(), grid.times(), &targets)?;
    SnapshotSequence::uniform(states, step)
}

/// Physical sampling times of the resampled snapshots: the inverse map
/// t(t̃) evaluated at the uniform rescaled targets by linear interpolation.
pub fn resample_times(
    original_times: &[f64],
    grid: &TimeGrid,
    samples: usize,
) -> Result<Vec<f64>> {
    if original_times.len() != grid.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} physical times for {} grid points",
            original_times.len(),
            grid.len()
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidParam(format!("need at least 2 samples, got {samples}")));
    }
    let step = grid.span() / (samples - 1) as f64;
    Ok((0..samples)
        .map(|j| interp_scalar(grid.times(), original_times, j as f64 * step))
        .collect())
}

fn interp_scalar(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.binary_search_by(|v| v.partial_cmp(&x).expect("finite times")) {
        Ok(i) => ys[i],
        Err(i) => {
            if i == 0 {
                ys[0]
            } else if i >= xs.len() {
                *ys.last().expect("non-empty")
            } else {
                let w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                ys[i - 1] * (1.0 - w) + ys[i] * w
            }
        }
    }
}

fn interpolate_snapshots(
    snaps: &[GridSignal],
    times: &[f64],
    targets: &[f64],
) -> Result<Vec<GridSignal>> {
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        let state = match times.binary_search_by(|v| v.partial_cmp(&t).expect("finite times")) {
            Ok(i) => snaps[i].clone(),
            Err(i) if i == 0 => snaps[0].clone(),
            Err(i) if i >= times.len() => snaps.last().expect("non-empty").clone(),
            Err(i) => {
                let w = (t - times[i - 1]) / (times[i] - times[i - 1]);
                let mut s = snaps[i - 1].scaled(1.0 - w);
                s.axpy(w, &snaps[i]);
                s
            }
        };
        out.push(state);
    }
    Ok(out)
}
