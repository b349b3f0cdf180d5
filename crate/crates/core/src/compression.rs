//! Tolerance-driven skeletons `M ≈ U·Vᵀ` (plain transpose).
//!
//! An adaptive randomized range finder grows an orthonormal basis `Q` in
//! blocks of Gaussian samples, each refined by one power iteration, until
//! a fresh unrefined block certifies `‖(I − QQᴴ)M‖₂` well below the
//! target. The projected matrix `QᴴM` is then re-truncated by a thin SVD,
//! and the final spectral error is estimated by power iteration.
//!
//! The sample stream depends only on the seed, so for a fixed seed the
//! output is reproducible and the basis for a smaller tolerance extends
//! the one for a larger tolerance.

use faer::linalg::matmul::matmul;
use faer::traits::Conjugate;
use faer::{Accum, Mat, MatRef};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dense::{gaussian_matrix, matvec, matvec_adjoint, par, spectral_norm_estimate};
use crate::error::{Error, Result};

/// Gaussian columns drawn per adaptive step.
pub const BLOCK: usize = 8;
/// Power-iteration steps for every norm estimate.
pub const NORM_ITERATIONS: usize = 20;
/// `10·√(2/π)`: turns the largest residual sample into a bound on the
/// residual norm that fails with probability at most `10^{−BLOCK}`.
const SAMPLE_BOUND: f64 = 7.978_845_608_028_654;
/// Fraction of the tolerance granted to the range residual.
const RANGE_SHARE: f64 = 0.1;
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Skeleton of a matrix at relative tolerance `epsilon`.
#[derive(Debug, Clone)]
pub struct LowRankFactor {
    pub u: Mat<Complex64>,
    pub v: Mat<Complex64>,
    pub epsilon: f64,
    /// Estimated `‖M − UVᵀ‖₂ / ‖M‖₂`.
    pub achieved_error: f64,
    /// `‖M − UVᵀ‖_F / ‖M‖_F`, for diagnostics.
    pub frobenius_error: f64,
    /// Power-iteration estimate of `‖M‖₂`.
    pub norm_estimate: f64,
    pub seed: u64,
    /// False when the tolerance could not be certified below full rank.
    pub converged: bool,
}

impl LowRankFactor {
    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// Bytes held by `U` and `V` in complex double precision.
    pub fn memory_bytes(&self) -> usize {
        16 * 2 * self.dim() * self.rank()
    }

    /// `U·(Vᵀ·x)`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let t: Vec<Complex64> = (0..self.rank())
            .map(|c| self.v.col(c).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect();
        matvec(self.u.as_ref(), &t)
    }

    pub fn to_dense(&self) -> Mat<Complex64> {
        let mut out = Mat::<Complex64>::zeros(self.dim(), self.dim());
        matmul(out.as_mut(), Accum::Replace, self.u.as_ref(), self.v.transpose(), ONE, par());
        out
    }
}

/// `A·B` for complex operands.
fn mul<L, R>(a: MatRef<'_, L>, b: MatRef<'_, R>) -> Mat<Complex64>
where
    L: Conjugate<Canonical = Complex64>,
    R: Conjugate<Canonical = Complex64>,
{
    let mut out = Mat::<Complex64>::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, ONE, par());
    out
}

/// Removes the components of the columns of `y` along `q` (two passes of
/// classical Gram–Schmidt).
fn project_out(q: MatRef<'_, Complex64>, y: &mut Mat<Complex64>) {
    if q.ncols() == 0 {
        return;
    }
    for _ in 0..2 {
        let coeffs = mul(q.adjoint(), y.as_ref());
        let mut tmp = Mat::<Complex64>::zeros(y.nrows(), y.ncols());
        matmul(tmp.as_mut(), Accum::Replace, q, coeffs.as_ref(), ONE, par());
        *y -= &tmp;
    }
}

/// Orthonormalizes the columns of `y` in place by modified Gram–Schmidt,
/// dropping columns that fall below `drop_tol` relative to their
/// original norm. Returns the surviving columns.
fn orthonormalize(y: Mat<Complex64>, drop_tol: f64) -> Mat<Complex64> {
    let mut kept: Vec<Vec<Complex64>> = Vec::with_capacity(y.ncols());
    for j in 0..y.ncols() {
        let mut col = y.col_as_slice(j).to_vec();
        let original = crate::dense::norm2(&col);
        if original == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for k in &kept {
                let c: Complex64 = k.iter().zip(&col).map(|(a, b)| a.conj() * b).sum();
                col.iter_mut().zip(k).for_each(|(x, a)| *x -= c * a);
            }
        }
        let nrm = crate::dense::norm2(&col);
        if nrm > drop_tol * original {
            col.iter_mut().for_each(|x| *x /= nrm);
            kept.push(col);
        }
    }
    Mat::from_fn(y.nrows(), kept.len(), |i, j| kept[j][i])
}

fn empty(n: usize, epsilon: f64, seed: u64) -> LowRankFactor {
    LowRankFactor {
        u: Mat::zeros(n, 0),
        v: Mat::zeros(n, 0),
        epsilon,
        achieved_error: 0.0,
        frobenius_error: 0.0,
        norm_estimate: 0.0,
        seed,
        converged: true,
    }
}

fn frobenius(m: MatRef<'_, Complex64>) -> f64 {
    (0..m.ncols()).map(|j| m.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>().sqrt()
}

/// `‖M − UVᵀ‖_F` without forming the product.
fn frobenius_residual(m: MatRef<'_, Complex64>, u: MatRef<'_, Complex64>, v: MatRef<'_, Complex64>) -> f64 {
    let r = u.ncols();
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let mut z = m[(i, j)];
            for c in 0..r {
                z -= u[(i, c)] * v[(j, c)];
            }
            acc += z.norm_sqr();
        }
    }
    acc.sqrt()
}

/// Skeleton of square `m` with `‖M − UVᵀ‖₂ ≤ epsilon·‖M‖₂` (estimated).
pub fn lowrank_factor(m: MatRef<'_, Complex64>, epsilon: f64, seed: u64) -> Result<LowRankFactor> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("tolerance must lie in (0, 1), got {epsilon}")));
    }
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let n = m.nrows();
    let norm = spectral_norm_estimate(
        n,
        |x| matvec(m, x),
        |x| matvec_adjoint(m, x),
        NORM_ITERATIONS,
        seed.wrapping_add(0x9e37_79b9),
    );
    if norm == 0.0 || n == 0 {
        return Ok(empty(n, epsilon, seed));
    }

    // Adaptive range finder.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = Mat::<Complex64>::zeros(n, 0);
    let range_tol = RANGE_SHARE * epsilon * norm;
    while q.ncols() < n {
        let omega = gaussian_matrix(&mut rng, n, BLOCK);
        let mut y = mul(m, omega.as_ref());
        project_out(q.as_ref(), &mut y);
        let worst = (0..y.ncols()).map(|j| crate::dense::norm2(y.col_as_slice(j))).fold(0.0, f64::max);
        if SAMPLE_BOUND * worst / (2.0f64).sqrt() <= range_tol {
            break;
        }
        // One power iteration: Y ← M·orth(Mᴴ·orth(Y)).
        let y = orthonormalize(y, 1e-12);
        if y.ncols() == 0 {
            break;
        }
        let z = orthonormalize(mul(m.adjoint(), y.as_ref()), 1e-12);
        let mut y = mul(m, z.as_ref());
        project_out(q.as_ref(), &mut y);
        let fresh = orthonormalize(y, 1e-10);
        if fresh.ncols() == 0 {
            break;
        }
        let k = q.ncols();
        let take = fresh.ncols().min(n - k);
        q = Mat::from_fn(n, k + take, |i, j| if j < k { q[(i, j)] } else { fresh[(i, j - k)] });
    }

    // Re-truncate B = QᴴM = W·Σ·Xᴴ, so M ≈ (QW)Σ·Xᴴ.
    let b = mul(q.adjoint(), m);
    let svd = b.thin_svd().map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    let sigma: Vec<f64> = svd.S().column_vector().iter().map(|s| s.re).collect();
    let qw = mul(q.as_ref(), svd.U());
    let x = svd.V();

    let build = |r: usize| {
        let u = Mat::from_fn(n, r, |i, j| qw[(i, j)] * sigma[j]);
        let v = Mat::from_fn(n, r, |i, j| x[(i, j)].conj());
        (u, v)
    };
    let residual = |u: &Mat<Complex64>, v: &Mat<Complex64>| {
        spectral_norm_estimate(
            n,
            |z| {
                let mut y = matvec(m, z);
                let t: Vec<Complex64> = (0..u.ncols()).map(|c| v.col(c).iter().zip(z).map(|(a, b)| a * b).sum()).collect();
                for (c, tc) in t.iter().enumerate() {
                    y.iter_mut().zip(u.col(c).iter()).for_each(|(yi, ui)| *yi -= ui * tc);
                }
                y
            },
            |z| {
                let mut y = matvec_adjoint(m, z);
                let t: Vec<Complex64> =
                    (0..u.ncols()).map(|c| u.col(c).iter().zip(z).map(|(a, b)| a.conj() * b).sum()).collect();
                for (c, tc) in t.iter().enumerate() {
                    y.iter_mut().zip(v.col(c).iter()).for_each(|(yi, vi)| *yi -= vi.conj() * tc);
                }
                y
            },
            NORM_ITERATIONS,
            seed.wrapping_add(0x7f4a_7c15),
        ) / norm
    };

    let mut share = 0.9;
    loop {
        let cut = share * epsilon * norm;
        let r = sigma.iter().position(|&s| s <= cut).unwrap_or(sigma.len());
        let (u, v) = build(r);
        let achieved = residual(&u, &v);
        if achieved <= epsilon || r == sigma.len() {
            let converged = achieved <= epsilon;
            let frob = frobenius_residual(m, u.as_ref(), v.as_ref()) / frobenius(m);
            return Ok(LowRankFactor {
                u,
                v,
                epsilon,
                achieved_error: achieved,
                frobenius_error: frob,
                norm_estimate: norm,
                seed,
                converged,
            });
        }
        share *= 0.5;
    }
}
