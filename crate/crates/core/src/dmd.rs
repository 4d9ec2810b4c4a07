//! Dynamic mode decomposition over snapshot sequences.
//!
//! Standard DMD reduces the snapshot matrices with a truncated SVD, fits the
//! least-squares map F = Ur^T Ψ_1^N Vr Σr^{-1} in the reduced space and
//! eigen-decomposes it. Symmetric DMD (SDMD) instead solves
//! F·XX^T + XX^T·F = XY^T + YX^T, the stationarity condition of the same
//! Frobenius objective constrained to symmetric F; its spectrum is real and
//! its modes are orthonormal.

use ndarray::{Array1, Array2};
use ndarray_linalg::{c64, Eig, Eigh, JobSvd, LeastSquaresSvd, Solve, SVDDC, UPLO};

use crate::error::{Error, Result};
use crate::flow::SnapshotSequence;
use crate::signal::{GridMeta, GridSignal};

/// How many singular triplets to keep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RankPolicy {
    /// Keep exactly `r` triplets, shrunk to the numerical rank when the data
    /// cannot support `r`.
    Fixed(usize),
    /// Keep σ_i with σ_i/σ_1 > tol.
    Threshold(f64),
}

impl Default for RankPolicy {
    fn default() -> Self {
        // near-singular systems are expected here (separable data is exactly
        // rank one); shrink instead of inverting tiny singular values
        RankPolicy::Threshold(1e-10)
    }
}

/// The two M×N data matrices: columns ψ_0..ψ_{N−1} and ψ_1..ψ_N.
#[derive(Clone, Debug)]
pub struct SnapshotMatrixPair {
    pub x0: Array2<f64>,
    pub x1: Array2<f64>,
    pub meta: GridMeta,
    pub dt: f64,
}

/// Truncated SVD of a data matrix: Ur (M×r, orthonormal columns),
/// Sr (descending positive singular values), Vr (N×r, orthonormal columns).
#[derive(Clone, Debug)]
pub struct ReducedBasis {
    pub ur: Array2<f64>,
    pub sr: Array1<f64>,
    pub vr: Array2<f64>,
}

impl ReducedBasis {
    pub fn rank(&self) -> usize {
        self.sr.len()
    }
}

/// Result of a (symmetric) dynamic mode decomposition.
///
/// Eigenvalues, modes and coordinates are stored as complex numbers; SDMD
/// results are real by construction and expose real views. Modes are sorted
/// by |α_i| descending and sign-normalized so the largest-modulus entry of a
/// real mode is positive.
#[derive(Clone, Debug)]
pub struct DmdResult {
    /// Eigenvalues μ_i of the reduced map.
    pub mu: Vec<c64>,
    /// Modes φ_i = Ur w_i as columns (M×r).
    pub modes: Array2<c64>,
    /// Coordinates of ψ_0 in the eigenbasis; for orthonormal eigenvectors
    /// this is w_i^* Ur^T ψ_0.
    pub alpha: Vec<c64>,
    /// Retained rank r.
    pub rank: usize,
    /// Uniform sampling step of the analyzed sequence.
    pub dt: f64,
    /// The r×r reduced map F.
    pub f_reduced: Array2<f64>,
    /// SVD basis the reduction happened in.
    pub basis: ReducedBasis,
    /// Shape of the underlying grid, for rebuilding signals.
    pub meta: GridMeta,
    /// True when produced by [`sdmd`]: F symmetric, spectrum real, modes
    /// orthonormal.
    pub symmetric: bool,
    /// False when the eigenvector matrix was numerically singular and the
    /// coordinates fell back to a least-squares fit.
    pub diagonalizable: bool,
}

impl DmdResult {
    /// Eigenvalues as reals, when the imaginary parts vanish.
    pub fn real_mu(&self) -> Option<Vec<f64>> {
        if self.mu.iter().all(|m| m.im == 0.0) {
            Some(self.mu.iter().map(|m| m.re).collect())
        } else {
            None
        }
    }

    /// Coordinates as reals, when the imaginary parts vanish.
    pub fn real_alpha(&self) -> Option<Vec<f64>> {
        if self.alpha.iter().all(|a| a.im == 0.0) {
            Some(self.alpha.iter().map(|a| a.re).collect())
        } else {
            None
        }
    }

    /// Modes as a real M×r matrix, when the imaginary parts vanish.
    pub fn real_modes(&self) -> Option<Array2<f64>> {
        if self.modes.iter().all(|v| v.im == 0.0) {
            Some(self.modes.map(|v| v.re))
        } else {
            None
        }
    }

    /// Deviation of the mode Gram matrix from the identity, max |Φ^*Φ − I|.
    /// Zero-ish for SDMD; reported for standard DMD where orthonormality is
    /// not guaranteed.
    pub fn gram_deviation(&self) -> f64 {
        let r = self.rank;
        let mut worst: f64 = 0.0;
        for i in 0..r {
            for j in 0..r {
                let mut g = c64::new(0.0, 0.0);
                for k in 0..self.modes.nrows() {
                    g += self.modes[(k, i)].conj() * self.modes[(k, j)];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }
}

/// Arrange a uniform sequence into the M×N matrix pair (Ψ_0^{N−1}, Ψ_1^N).
///
/// Non-uniform sequences are rejected: rescale and resample them first.
pub fn build_pair(seq: &SnapshotSequence) -> Result<SnapshotMatrixPair> {
    if !seq.is_uniform() {
        return Err(Error::NonUniform);
    }
    if seq.len() < 2 {
        return Err(Error::EmptyData("need at least two snapshots"));
    }
    let n = seq.len() - 1;
    let meta = seq.snapshots()[0].meta();
    let m = meta.len();
    let mut x0 = Array2::zeros((m, n));
    let mut x1 = Array2::zeros((m, n));
    for (k, snap) in seq.snapshots().iter().enumerate() {
        for (i, &v) in snap.flat().iter().enumerate() {
            if k < n {
                x0[(i, k)] = v;
            }
            if k > 0 {
                x1[(i, k - 1)] = v;
            }
        }
    }
    Ok(SnapshotMatrixPair { x0, x1, meta, dt: seq.uniform_dt()? })
}

/// Economy SVD of `a` truncated by `policy`.
///
/// The retained rank never exceeds the numerical rank
/// (σ_i > max(M,N)·ε·σ_1); a fixed request past it is shrunk with a warning.
pub fn truncated_svd(a: &Array2<f64>, policy: RankPolicy) -> Result<ReducedBasis> {
    let (m, n) = a.dim();
    if m == 0 || n == 0 {
        return Err(Error::EmptyData("empty matrix"));
    }
    let (u, s, vt) = a.svddc(JobSvd::Some)?;
    let u = u.ok_or(Error::EmptyData("svd did not return U"))?;
    let vt = vt.ok_or(Error::EmptyData("svd did not return V^T"))?;
    let sigma_max = s[0];
    if sigma_max <= 0.0 {
        return Err(Error::EmptyData("zero data matrix"));
    }
    let floor = m.max(n) as f64 * f64::EPSILON * sigma_max;
    let numerical_rank = s.iter().take_while(|&&x| x > floor).count().max(1);
    let r = match policy {
        RankPolicy::Fixed(r) => {
            if r == 0 {
                return Err(Error::InvalidParam("rank must be at least 1".into()));
            }
            if r > numerical_rank {
                log::warn!(
                    "requested rank {r} exceeds numerical rank {numerical_rank}; shrinking"
                );
            }
            r.min(numerical_rank)
        }
        RankPolicy::Threshold(tol) => {
            if !(0.0..1.0).contains(&tol) {
                return Err(Error::InvalidParam(format!("threshold must be in [0, 1), got {tol}")));
            }
            s.iter()
                .take_while(|&&x| x / sigma_max > tol)
                .count()
                .clamp(1, numerical_rank)
        }
    };
    Ok(ReducedBasis {
        ur: u.slice(ndarray::s![.., ..r]).to_owned(),
        sr: s.slice(ndarray::s![..r]).to_owned(),
        vr: vt.slice(ndarray::s![..r, ..]).t().to_owned(),
    })
}

fn reduced_initial(basis: &ReducedBasis, pair: &SnapshotMatrixPair) -> Array1<f64> {
    basis.ur.t().dot(&pair.x0.column(0))
}

/// Sort eigen-triplets by |α| descending and fix real-mode signs.
fn order_and_normalize(
    mu: &mut Vec<c64>,
    alpha: &mut Vec<c64>,
    modes: &mut Array2<c64>,
) {
    let r = mu.len();
    let mut idx: Vec<usize> = (0..r).collect();
    idx.sort_by(|&i, &j| {
        alpha[j].norm().partial_cmp(&alpha[i].norm()).expect("finite coordinates")
    });
    let mut new_mu = Vec::with_capacity(r);
    let mut new_alpha = Vec::with_capacity(r);
    let mut new_modes = Array2::zeros((modes.nrows(), r));
    for (dst, &src) in idx.iter().enumerate() {
        new_mu.push(mu[src]);
        new_alpha.push(alpha[src]);
        let mut col = modes.column(src).to_owned();
        // sign convention for (numerically) real modes: largest-modulus
        // entry positive, coordinate flipped to compensate
        if let Some(peak) = col.iter().max_by(|a, b| {
            a.norm().partial_cmp(&b.norm()).expect("finite mode entries")
        }) {
            if peak.im.abs() <= 1e-12 * peak.norm() && peak.re < 0.0 {
                col.mapv_inplace(|v| -v);
                new_alpha[dst] = -new_alpha[dst];
            }
        }
        new_modes.column_mut(dst).assign(&col);
    }
    *mu = new_mu;
    *alpha = new_alpha;
    *modes = new_modes;
}

fn to_complex(a: &Array2<f64>) -> Array2<c64> {
    a.map(|&v| c64::new(v, 0.0))
}

/// Standard DMD (rank-reduced least-squares fit plus eigen-decomposition).
pub fn dmd(seq: &SnapshotSequence, policy: RankPolicy) -> Result<DmdResult> {
    let pair = build_pair(seq)?;
    let basis = truncated_svd(&pair.x0, policy)?;
    let r = basis.rank();

    // F = Ur^T X1 Vr Sr^{-1}
    let mut f_reduced = basis.ur.t().dot(&pair.x1).dot(&basis.vr);
    for j in 0..r {
        let inv = 1.0 / basis.sr[j];
        f_reduced.column_mut(j).mapv_inplace(|v| v * inv);
    }

    let (mu_arr, w) = f_reduced.eig()?;
    let mut mu: Vec<c64> = mu_arr.to_vec();
    if mu.iter().any(|m| m.norm() == 0.0) {
        log::warn!("reduced map is rank deficient; zero eigenvalues retained");
    }

    let x0_red = reduced_initial(&basis, &pair).map(|&v| c64::new(v, 0.0));
    // coordinates of ψ_0 in the eigenbasis: solve W α = Ur^T ψ_0; for
    // orthonormal W this equals w_i^* Ur^T ψ_0
    let (mut alpha, diagonalizable) = match w.solve(&x0_red) {
        Ok(sol) => {
            let mut resid = w.dot(&sol);
            resid -= &x0_red;
            let ok = resid.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
                <= 1e-8 * x0_red.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
            if ok {
                (sol.to_vec(), true)
            } else {
                (w.least_squares(&x0_red)?.solution.to_vec(), false)
            }
        }
        Err(_) => {
            log::warn!("eigenvector matrix is singular; using least-squares coordinates");
            (w.least_squares(&x0_red)?.solution.to_vec(), false)
        }
    };

    let mut modes = to_complex(&basis.ur).dot(&w);
    order_and_normalize(&mut mu, &mut alpha, &mut modes);

    Ok(DmdResult {
        mu,
        modes,
        alpha,
        rank: r,
        dt: pair.dt,
        f_reduced,
        basis,
        meta: pair.meta,
        symmetric: false,
        diagonalizable,
    })
}

/// Symmetric DMD: the Frobenius-optimal symmetric reduced map, via the
/// Sylvester equation F·XX^T + XX^T·F = XY^T + YX^T.
pub fn sdmd(seq: &SnapshotSequence, policy: RankPolicy) -> Result<DmdResult> {
    let pair = build_pair(seq)?;
    let basis = truncated_svd(&pair.x0, policy)?;
    let r = basis.rank();

    let x = basis.ur.t().dot(&pair.x0);
    let y = basis.ur.t().dot(&pair.x1);
    let gram = x.dot(&x.t());
    let rhs = x.dot(&y.t()) + y.dot(&x.t());
    let (f_reduced, cond) = solve_symmetric_sylvester_with_cond(&gram, &rhs)?;
    if cond > 1e12 {
        log::warn!("snapshot Gram matrix is near-singular (condition {cond:.3e}); small directions were dropped");
    }

    let (vals, vecs) = f_reduced.eigh(UPLO::Lower)?;
    let x0_red = reduced_initial(&basis, &pair);
    let alpha_real = vecs.t().dot(&x0_red);

    let mut mu: Vec<c64> = vals.iter().map(|&v| c64::new(v, 0.0)).collect();
    let mut alpha: Vec<c64> = alpha_real.iter().map(|&v| c64::new(v, 0.0)).collect();
    let mut modes = to_complex(&basis.ur.dot(&vecs));
    order_and_normalize(&mut mu, &mut alpha, &mut modes);

    Ok(DmdResult {
        mu,
        modes,
        alpha,
        rank: r,
        dt: pair.dt,
        f_reduced,
        basis,
        meta: pair.meta,
        symmetric: true,
        diagonalizable: true,
    })
}

/// Solve FG + GF = C for symmetric F, with G symmetric positive
/// semi-definite and C symmetric.
///
/// G = QΛQ^T turns the equation into (Q^T F Q)_ij = (Q^T C Q)_ij/(λ_i+λ_j);
/// entries with λ_i+λ_j ≤ 1e−12·λ_max carry no data energy and are zeroed.
pub fn solve_symmetric_sylvester(g: &Array2<f64>, c: &Array2<f64>) -> Result<Array2<f64>> {
    solve_symmetric_sylvester_with_cond(g, c).map(|(f, _)| f)
}

fn solve_symmetric_sylvester_with_cond(
    g: &Array2<f64>,
    c: &Array2<f64>,
) -> Result<(Array2<f64>, f64)> {
    let r = g.nrows();
    if g.dim() != (r, r) || c.dim() != (r, r) {
        return Err(Error::ShapeMismatch("sylvester operands must be square and equal-sized".into()));
    }
    let (lam, q) = g.eigh(UPLO::Lower)?;
    let lam_max = lam.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lam_max <= 0.0 {
        return Err(Error::EmptyData("gram matrix carries no energy"));
    }
    let cutoff = 1e-12 * lam_max;
    let mut reduced = q.t().dot(c).dot(&q);
    for i in 0..r {
        for j in 0..r {
            let denom = lam[i] + lam[j];
            if denom <= cutoff {
                reduced[(i, j)] = 0.0;
            } else {
                reduced[(i, j)] /= denom;
            }
        }
    }
    let f = q.dot(&reduced).dot(&q.t());
    let lam_min_pos = lam.iter().cloned().filter(|&v| v > cutoff).fold(lam_max, f64::min);
    Ok((f, lam_max / lam_min_pos))
}

/// Continuous-time eigenvalues μ̃_i = ln(μ_i)/dt (principal branch).
///
/// A nonpositive real μ has no real logarithm; its mode alternates sign every
/// step and comes back complex, with a warning.
pub fn continuous_eigs(result: &DmdResult) -> Result<Vec<c64>> {
    if !(result.dt > 0.0) {
        return Err(Error::InvalidParam(format!("dt must be positive, got {}", result.dt)));
    }
    let mut out = Vec::with_capacity(result.mu.len());
    for m in &result.mu {
        if m.norm() == 0.0 {
            return Err(Error::UndefinedEigenvalue("log of zero eigenvalue"));
        }
        if m.im == 0.0 && m.re < 0.0 {
            log::warn!("eigenvalue {} is negative; continuous eigenvalue is complex (alternating mode)", m.re);
        }
        out.push(m.ln() / result.dt);
    }
    Ok(out)
}

/// Discrete reconstruction ψ̃_k = Σ_i α_i μ_i^k φ_i.
pub fn reconstruct_discrete(result: &DmdResult, k: usize) -> Result<GridSignal> {
    let m = result.modes.nrows();
    let mut acc = vec![c64::new(0.0, 0.0); m];
    for i in 0..result.rank {
        let weight = result.alpha[i] * result.mu[i].powu(k as u32);
        for (row, v) in acc.iter_mut().enumerate() {
            *v += weight * result.modes[(row, i)];
        }
    }
    // conjugate eigen-pairs cancel the imaginary parts on real data
    GridSignal::from_flat(result.meta, acc.iter().map(|v| v.re).collect())
}

/// DMD fitting error ‖Y − FX‖_F² in the reduced space.
pub fn err_dmd(result: &DmdResult, pair: &SnapshotMatrixPair) -> f64 {
    let x = result.basis.ur.t().dot(&pair.x0);
    let y = result.basis.ur.t().dot(&pair.x1);
    let resid = &y - &result.f_reduced.dot(&x);
    resid.iter().map(|v| v * v).sum()
}

/// Discrete reconstruction error Σ_k ‖ψ̃_k − ψ_k‖².
pub fn err_rec_discrete(result: &DmdResult, seq: &SnapshotSequence) -> Result<f64> {
    let mut total = 0.0;
    for (k, snap) in seq.snapshots().iter().enumerate() {
        let rec = reconstruct_discrete(result, k)?;
        total += rec
            .flat()
            .iter()
            .zip(snap.flat())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::analytic_dmd_rank1;
    use crate::flow::{synth_eigenflow, FlowParams, Sampling};
    use approx::assert_relative_eq;
    use ndarray::array;
    use proptest::prelude::{prop_assert, prop_assert_eq, prop_assume, proptest, ProptestConfig};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn seq_1d(columns: &[Vec<f64>], dt: f64) -> SnapshotSequence {
        let snaps = columns
            .iter()
            .map(|c| GridSignal::one_d(c, 1.0).unwrap())
            .collect();
        SnapshotSequence::uniform(snaps, dt).unwrap()
    }

    fn linear_system_seq(a: [[f64; 2]; 2], init: [f64; 2], count: usize) -> SnapshotSequence {
        let mut state = init;
        let mut cols = vec![state.to_vec()];
        for _ in 1..count {
            state = [
                a[0][0] * state[0] + a[0][1] * state[1],
                a[1][0] * state[0] + a[1][1] * state[1],
            ];
            cols.push(state.to_vec());
        }
        seq_1d(&cols, 1.0)
    }

    #[test]
    fn pair_layout_and_overlap() {
        let seq = seq_1d(&[vec![1.0], vec![2.0], vec![4.0]], 1.0);
        let pair = build_pair(&seq).unwrap();
        assert_eq!(pair.x0, array![[1.0, 2.0]]);
        assert_eq!(pair.x1, array![[2.0, 4.0]]);
        assert_eq!(pair.x0[(0, 1)], pair.x1[(0, 0)]);
    }

    #[test]
    fn pair_rejects_non_uniform() {
        let f = GridSignal::one_d(&[1.0], 1.0).unwrap();
        let seq = SnapshotSequence::with_dts(
            vec![f.clone(), f.clone(), f.clone()],
            vec![0.1, 0.3],
        )
        .unwrap();
        assert!(matches!(build_pair(&seq), Err(Error::NonUniform)));
    }

    #[test]
    fn svd_of_rank_one_matrix() {
        let f = array![3.0, 0.0, 4.0];
        let a_vec = array![1.0, 0.5, 0.25, 0.125];
        let mut mat = Array2::zeros((3, 4));
        for i in 0..3 {
            for j in 0..4 {
                mat[(i, j)] = f[i] * a_vec[j];
            }
        }
        let basis = truncated_svd(&mat, RankPolicy::Fixed(4)).unwrap();
        assert_eq!(basis.rank(), 1);
        let f_norm = 5.0;
        let a_norm = a_vec.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert_relative_eq!(basis.sr[0], f_norm * a_norm, epsilon = 1e-12);
        for i in 0..3 {
            assert_relative_eq!(basis.ur[(i, 0)].abs(), f[i].abs() / f_norm, epsilon = 1e-12);
        }
    }

    #[test]
    fn svd_identity_fixed_two() {
        let eye: Array2<f64> = Array2::eye(3);
        let basis = truncated_svd(&eye, RankPolicy::Fixed(2)).unwrap();
        assert_eq!(basis.rank(), 2);
        assert_relative_eq!(basis.sr[0], 1.0);
        assert_relative_eq!(basis.sr[1], 1.0);
    }

    #[test]
    fn svd_truncation_is_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Array2::from_shape_fn((50, 10), |_| rng.gen_range(-1.0..1.0));
        let (_, s_full, _) = a.svddc(JobSvd::None).unwrap();
        for r in [1, 3, 7] {
            let basis = truncated_svd(&a, RankPolicy::Fixed(r)).unwrap();
            let mut approx_mat: Array2<f64> = Array2::zeros(a.dim());
            for k in 0..r {
                let u = basis.ur.column(k);
                let v = basis.vr.column(k);
                for i in 0..a.nrows() {
                    for j in 0..a.ncols() {
                        approx_mat[(i, j)] += basis.sr[k] * u[i] * v[j];
                    }
                }
            }
            let err: f64 = (&a - &approx_mat).iter().map(|v| v * v).sum();
            let best: f64 = s_full.iter().skip(r).map(|v| v * v).sum();
            assert_relative_eq!(err, best, max_relative = 1e-10);
        }
    }

    #[test]
    fn appendix_system_eigenvalues() {
        let seq = linear_system_seq([[0.1, 0.6], [0.6, 0.1]], [1.0, 0.0], 8);
        for result in [
            dmd(&seq, RankPolicy::Fixed(2)).unwrap(),
            sdmd(&seq, RankPolicy::Fixed(2)).unwrap(),
        ] {
            let mut mu = result.real_mu().expect("real spectrum");
            mu.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_relative_eq!(mu[0], -0.5, epsilon = 1e-12);
            assert_relative_eq!(mu[1], 0.7, epsilon = 1e-12);
        }
    }

    #[test]
    fn appendix_system_reconstruction_matches_matrix_power() {
        let a = [[0.1, 0.6], [0.6, 0.1]];
        let seq = linear_system_seq(a, [1.0, 0.0], 8);
        let result = dmd(&seq, RankPolicy::Fixed(2)).unwrap();
        for k in 0..8 {
            let rec = reconstruct_discrete(&result, k).unwrap();
            let truth = seq.snapshots()[k].flat();
            for (r, t) in rec.flat().iter().zip(truth) {
                assert!((r - t).abs() <= 1e-10, "k={k}");
            }
        }
        assert!(err_rec_discrete(&result, &seq).unwrap() <= 1e-20);
    }

    #[test]
    fn rank_one_geometric_data() {
        let f = vec![0.6, 0.8];
        let q: f64 = 0.5;
        let cols: Vec<Vec<f64>> =
            (0..6).map(|k| f.iter().map(|v| v * q.powi(k)).collect()).collect();
        let seq = seq_1d(&cols, 1.0);
        let result = dmd(&seq, RankPolicy::Fixed(1)).unwrap();
        assert_eq!(result.rank, 1);
        assert_relative_eq!(result.mu[0].re, q, epsilon = 1e-12);
        assert_eq!(result.mu[0].im, 0.0);
        assert_relative_eq!(result.alpha[0].re.abs(), 1.0, epsilon = 1e-12);
        let pair = build_pair(&seq).unwrap();
        assert!(err_dmd(&result, &pair) <= 1e-24);
        let rec0 = reconstruct_discrete(&result, 0).unwrap();
        for (r, t) in rec0.flat().iter().zip(&f) {
            assert_relative_eq!(r, t, epsilon = 1e-12);
        }
    }

    #[test]
    fn lemma_one_hand_example() {
        let a_vec = [1.0, 0.6, 0.2];
        let f = vec![1.0];
        let cols: Vec<Vec<f64>> = a_vec.iter().map(|&s| vec![s * f[0]]).collect();
        let seq = seq_1d(&cols, 1.0);
        let result = dmd(&seq, RankPolicy::Fixed(1)).unwrap();
        assert_relative_eq!(result.mu[0].re, 0.72 / 1.36, epsilon = 1e-12);
        let pair = build_pair(&seq).unwrap();
        assert_relative_eq!(err_dmd(&result, &pair), 0.4 - 0.72 * 0.72 / 1.36, epsilon = 1e-12);
    }

    #[test]
    fn lemma_one_equivalence_on_random_decays() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let f: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0f64..1.0)).collect();
        let f_norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        for _ in 0..50 {
            let n = rng.gen_range(3..12);
            let mut a_vec = vec![1.0];
            for k in 1..n {
                // decreasing positive decay, never colinear shifts
                let prev: f64 = a_vec[k - 1];
                a_vec.push(prev * rng.gen_range(0.2..0.95));
            }
            let oracle = analytic_dmd_rank1(&a_vec, f_norm).unwrap();
            let cols: Vec<Vec<f64>> =
                a_vec.iter().map(|&s| f.iter().map(|v| v * s).collect()).collect();
            let seq = seq_1d(&cols, 1.0);
            let result = dmd(&seq, RankPolicy::Threshold(1e-10)).unwrap();
            assert_eq!(result.rank, 1);
            assert_relative_eq!(result.mu[0].re, oracle.mu, max_relative = 1e-10);
            assert_relative_eq!(result.alpha[0].re.abs(), oracle.alpha, max_relative = 1e-10);
            let pair = build_pair(&seq).unwrap();
            // the closed form is stated in decay units; the Frobenius error
            // of the ψ-data carries the ‖f‖² factor
            assert_relative_eq!(
                err_dmd(&result, &pair),
                oracle.err_dmd * f_norm * f_norm,
                max_relative = 1e-8,
                epsilon = 1e-12
            );
            // mode is ±f/‖f‖
            let phi = result.modes.column(0);
            let overlap: f64 =
                phi.iter().zip(&f).map(|(m, v)| m.re * v * oracle.phi_scale).sum();
            assert_relative_eq!(overlap.abs(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn sylvester_identity_gram() {
        let g: Array2<f64> = Array2::eye(3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let raw = Array2::from_shape_fn((3, 3), |_| rng.gen_range(-1.0..1.0));
        let c = &raw + &raw.t();
        let f = solve_symmetric_sylvester(&g, &c).unwrap();
        let half = &c * 0.5;
        for (a, b) in f.iter().zip(half.iter()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn sylvester_diagonal_example() {
        let g = array![[1.0, 0.0], [0.0, 2.0]];
        let c = array![[2.0, 3.0], [3.0, 8.0]];
        let f = solve_symmetric_sylvester(&g, &c).unwrap();
        let expected = array![[1.0, 1.0], [1.0, 2.0]];
        for (a, b) in f.iter().zip(expected.iter()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
        let resid = f.dot(&g) + g.dot(&f) - &c;
        assert!(resid.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-12);
    }

    #[test]
    fn sylvester_rejects_zero_gram() {
        let g: Array2<f64> = Array2::zeros((2, 2));
        let c: Array2<f64> = Array2::eye(2);
        assert!(matches!(solve_symmetric_sylvester(&g, &c), Err(Error::EmptyData(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// Round trip: C := F₀G + GF₀ recovers F₀ for PSD G.
        #[test]
        fn sylvester_round_trip(seed in 0u64..1_000_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..6);
            let b = Array2::from_shape_fn((n, n), |_| rng.gen_range(-1.0f64..1.0));
            let g = b.t().dot(&b) + Array2::<f64>::eye(n) * 0.1;
            let raw = Array2::from_shape_fn((n, n), |_| rng.gen_range(-1.0f64..1.0));
            let f0 = (&raw + &raw.t()) * 0.5;
            let c = f0.dot(&g) + g.dot(&f0);
            let f = solve_symmetric_sylvester(&g, &c).unwrap();
            let err: f64 = (&f - &f0).iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-9);
        }
    }

    #[test]
    fn sdmd_appendix_case_is_real_orthonormal() {
        let seq = linear_system_seq([[0.1, 0.6], [0.6, 0.1]], [1.0, 0.0], 8);
        let result = sdmd(&seq, RankPolicy::Fixed(2)).unwrap();
        assert!(result.symmetric);
        let asym: f64 = (&result.f_reduced - &result.f_reduced.t())
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        let scale: f64 = result.f_reduced.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(asym <= 1e-10 * scale);
        assert!(result.gram_deviation() <= 1e-8);
        assert!(result.real_mu().is_some());
    }

    #[test]
    fn sdmd_orthonormal_gram_reduces_to_half_rhs() {
        // orthonormal reduced rows: XX^T = I, so F = (XY^T + YX^T)/2
        let x: Array2<f64> = Array2::eye(3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let y = Array2::from_shape_fn((3, 3), |_| rng.gen_range(-1.0..1.0));
        let c = x.dot(&y.t()) + y.dot(&x.t());
        let f = solve_symmetric_sylvester(&x.dot(&x.t()), &c).unwrap();
        for (a, b) in f.iter().zip((&c * 0.5).iter()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn sdmd_zero_error_on_adaptive_eigen_data() {
        // Theorem 2 case: adaptive sampling with delta = 0.3 gives mu = 0.7
        let f = GridSignal::one_d(&[0.5, 1.5, 1.0], 1.0).unwrap();
        let params = FlowParams::new(-0.8, 1.5, f.norm_sq()).unwrap();
        let seq = synth_eigenflow(&f, &params, Sampling::Adaptive { delta: 0.3, snapshots: 9 })
            .unwrap()
            .reindexed_uniform(0.3)
            .unwrap();
        let result = sdmd(&seq, RankPolicy::default()).unwrap();
        assert_eq!(result.rank, 1);
        assert_relative_eq!(result.mu[0].re, 0.7, epsilon = 1e-12);
        assert!(err_rec_discrete(&result, &seq).unwrap() <= 1e-20 * f.norm_sq());
    }

    #[test]
    fn sdmd_objective_is_locally_minimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..20 {
            let r = rng.gen_range(2..5);
            let n = r + rng.gen_range(2..6);
            let x = Array2::from_shape_fn((r, n), |_| rng.gen_range(-1.0f64..1.0));
            let y = Array2::from_shape_fn((r, n), |_| rng.gen_range(-1.0f64..1.0));
            let gram = x.dot(&x.t());
            let rhs = x.dot(&y.t()) + y.dot(&x.t());
            let f = solve_symmetric_sylvester(&gram, &rhs).unwrap();
            let objective = |m: &Array2<f64>| -> f64 {
                (&y - &m.dot(&x)).iter().map(|v| v * v).sum()
            };
            let base = objective(&f);
            let scale: f64 = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            for _ in 0..100 {
                let raw = Array2::from_shape_fn((r, r), |_| rng.gen_range(-1.0f64..1.0));
                let sym = (&raw + &raw.t()) * (1e-4 * scale);
                let perturbed = objective(&(&f + &sym));
                assert!(perturbed >= base - 1e-12 * base.max(1.0));
            }
        }
    }

    #[test]
    fn continuous_eigs_values() {
        let seq = seq_1d(&[vec![1.0], vec![(-0.2f64).exp()], vec![(-0.4f64).exp()]], 1.0);
        let result = dmd(&seq, RankPolicy::Fixed(1)).unwrap();
        let cont = continuous_eigs(&result).unwrap();
        assert_relative_eq!(cont[0].re, -0.2, epsilon = 1e-12);
        assert_eq!(cont[0].im, 0.0);

        // mu = 1 (steady) gives 0; mu = 0.5 with dt = 0.1 gives ln(0.5)/0.1
        let steady = seq_1d(&[vec![2.0], vec![2.0], vec![2.0]], 1.0);
        let s = dmd(&steady, RankPolicy::Fixed(1)).unwrap();
        assert_relative_eq!(continuous_eigs(&s).unwrap()[0].re, 0.0, epsilon = 1e-14);

        let halving = seq_1d(&[vec![1.0], vec![0.5], vec![0.25]], 0.1);
        let h = dmd(&halving, RankPolicy::Fixed(1)).unwrap();
        assert_relative_eq!(
            continuous_eigs(&h).unwrap()[0].re,
            0.5f64.ln() / 0.1,
            epsilon = 1e-10
        );
        assert!((continuous_eigs(&h).unwrap()[0].re + 6.931).abs() < 1e-3);
    }

    #[test]
    fn continuous_eigs_negative_mu_is_complex() {
        let seq = seq_1d(&[vec![1.0], vec![-0.5], vec![0.25]], 1.0);
        let result = dmd(&seq, RankPolicy::Fixed(1)).unwrap();
        assert_relative_eq!(result.mu[0].re, -0.5, epsilon = 1e-12);
        let cont = continuous_eigs(&result).unwrap();
        assert_relative_eq!(cont[0].im, std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn projection_identity_at_k_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        // smooth-ish random data, full analysis rank
        let m = 12;
        let cols: Vec<Vec<f64>> = (0..7)
            .map(|_| (0..m).map(|_| rng.gen_range(-1.0f64..1.0)).collect())
            .collect();
        let seq = seq_1d(&cols, 1.0);
        let result = dmd(&seq, RankPolicy::Fixed(4)).unwrap();
        assert!(result.diagonalizable);
        let rec0 = reconstruct_discrete(&result, 0).unwrap();
        let x0 = Array1::from_vec(cols[0].clone());
        let projected = result.basis.ur.dot(&result.basis.ur.t().dot(&x0));
        for (a, b) in rec0.flat().iter().zip(projected.iter()) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn err_dmd_matches_brute_force_minimizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let m = rng.gen_range(4..9);
            let n = rng.gen_range(3..7);
            let cols: Vec<Vec<f64>> = (0..n + 1)
                .map(|_| (0..m).map(|_| rng.gen_range(-1.0f64..1.0)).collect())
                .collect();
            let seq = seq_1d(&cols, 1.0);
            let r = n.min(m).min(3);
            let result = dmd(&seq, RankPolicy::Fixed(r)).unwrap();
            let pair = build_pair(&seq).unwrap();
            let fast = err_dmd(&result, &pair);

            // oracle: residual of the normal-equations minimizer F G = Y X^T,
            // solved row by row (G symmetric)
            let x = result.basis.ur.t().dot(&pair.x0);
            let y = result.basis.ur.t().dot(&pair.x1);
            let gram = x.dot(&x.t());
            let rhs = y.dot(&x.t());
            let mut f_opt: Array2<f64> = Array2::zeros((result.rank, result.rank));
            for i in 0..result.rank {
                let row = gram.solve(&rhs.row(i).to_owned()).unwrap();
                f_opt.row_mut(i).assign(&row);
            }
            let brute: f64 = (&y - &f_opt.dot(&x)).iter().map(|v| v * v).sum();
            assert_relative_eq!(fast, brute, max_relative = 1e-8, epsilon = 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// Column overlap of the data matrices holds for arbitrary sequences.
        #[test]
        fn pair_columns_overlap(values in proptest::collection::vec(-10.0f64..10.0, 6..30)) {
            let cols: Vec<Vec<f64>> = values.chunks(3).map(|c| c.to_vec()).collect();
            prop_assume!(cols.len() >= 2 && cols.iter().all(|c| c.len() == 3));
            let seq = seq_1d(&cols, 0.5);
            let pair = build_pair(&seq).unwrap();
            for j in 0..pair.x0.ncols() - 1 {
                for i in 0..3 {
                    prop_assert_eq!(pair.x0[(i, j + 1)], pair.x1[(i, j)]);
                }
            }
        }
    }
}
