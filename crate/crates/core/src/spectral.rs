//! Symmetric eigen-machinery: square roots of Gram matrices, the
//! keep-the-smallest spectral filter `X_n`, and the Laplacian filter
//! `P^L_n = L_n⁺ L_n` with a dense and an FFT realization.
//!
//! For a symmetric matrix the singular values are the absolute values of
//! the eigenvalues, so every SVD below is an eigendecomposition with
//! columns reordered by `|λ|`.

use faer::{Mat, MatRef, Side};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dense::{mul_rr, RealSymMatrix};
use crate::error::{Error, Result};
use crate::mesh2d::CurveMesh;

/// Relative threshold `τ/σ_max` under which a singular value counts as zero.
pub const ZERO_TOL: f64 = 1e-10;

/// Eigendecomposition `X = V·diag(λ)·Vᵀ` with `|λ|` sorted descending.
#[derive(Debug, Clone)]
pub struct SymEigenbasis {
    pub eigenvalues: Vec<f64>,
    pub vectors: Mat<f64>,
}

impl SymEigenbasis {
    pub fn new(x: &RealSymMatrix) -> Result<Self> {
        let evd = x
            .mat()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
        let n = x.nrows();
        let s = evd.S().column_vector();
        let u = evd.U();
        // Stable sort on |λ| descending; ascending eigenvalue order breaks ties.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| s[b].abs().partial_cmp(&s[a].abs()).unwrap());
        let eigenvalues = order.iter().map(|&i| s[i]).collect();
        let vectors = Mat::from_fn(n, n, |i, j| u[(i, order[j])]);
        Ok(Self { eigenvalues, vectors })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest singular value.
    pub fn sigma_max(&self) -> f64 {
        self.eigenvalues.first().map_or(0.0, |v| v.abs())
    }

    /// `V·diag(f(λ_j, j))·Vᵀ`.
    pub fn compose(&self, f: impl Fn(f64, usize) -> f64) -> Mat<f64> {
        let n = self.len();
        let scaled = Mat::from_fn(n, n, |i, j| self.vectors[(i, j)] * f(self.eigenvalues[j], j));
        mul_rr(scaled.as_ref(), self.vectors.transpose())
    }
}

/// `(G^{1/2}, G^{-1/2})` of a symmetric positive definite matrix.
pub fn sym_sqrt_and_invsqrt(g: &RealSymMatrix) -> Result<(RealSymMatrix, RealSymMatrix)> {
    let basis = SymEigenbasis::new(g)?;
    let max = basis.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = basis.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 1e-14 * max) {
        return Err(Error::NotPositiveDefinite { min, max });
    }
    let sqrt = symmetrized(basis.compose(|l, _| l.sqrt()));
    let inv = symmetrized(basis.compose(|l, _| 1.0 / l.sqrt()));
    Ok((RealSymMatrix::new(sqrt)?, RealSymMatrix::new(inv)?))
}

/// `(X + Xᵀ)/2`.
pub fn symmetrized(x: Mat<f64>) -> Mat<f64> {
    let n = x.nrows();
    Mat::from_fn(n, n, |i, j| 0.5 * (x[(i, j)] + x[(j, i)]))
}

/// `A·X·A` for symmetric `A`, symmetrized against rounding.
pub fn congruence(a: &RealSymMatrix, x: &RealSymMatrix) -> Result<RealSymMatrix> {
    let ax = mul_rr(a.mat(), x.mat());
    RealSymMatrix::new(symmetrized(mul_rr(ax.as_ref(), a.mat())))
}

fn check_window(n: usize, len: usize) -> Result<()> {
    if n > len {
        return Err(Error::OutOfRange { index: n, len: len + 1 });
    }
    Ok(())
}

/// `X_n`: keeps the `n` smallest singular values of symmetric `X`.
pub fn filtered_matrix(x: &RealSymMatrix, n: usize) -> Result<Mat<f64>> {
    check_window(n, x.nrows())?;
    let basis = SymEigenbasis::new(x)?;
    let first_kept = basis.len() - n;
    Ok(basis.compose(|l, j| if j >= first_kept { l } else { 0.0 }))
}

/// `[X_n]⁺`: pseudo-inverse of the filtered matrix with threshold
/// `ZERO_TOL·σ_max(X)`.
pub fn filtered_pseudo_inverse(x: &RealSymMatrix, n: usize) -> Result<Mat<f64>> {
    check_window(n, x.nrows())?;
    let basis = SymEigenbasis::new(x)?;
    let tau = ZERO_TOL * basis.sigma_max();
    let first_kept = basis.len() - n;
    Ok(basis.compose(|l, j| if j >= first_kept && l.abs() > tau { 1.0 / l } else { 0.0 }))
}

/// Treatment of nullspace modes that fall inside the filter window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NullspacePolicy {
    /// `L_n⁺ L_n` exactly: zero modes are removed.
    #[default]
    Exclude,
    /// Zero modes inside the window are passed through.
    Retain,
}

/// The orthogonal projector `P^L_n` onto the `n` lowest Laplacian modes.
#[derive(Debug, Clone)]
pub struct LaplacianFilter {
    basis: SymEigenbasis,
    n: usize,
    tau: f64,
    policy: NullspacePolicy,
    /// Orthonormal columns spanning the range of the projector, ordered by
    /// increasing Laplacian eigenvalue.
    kept: Mat<f64>,
}

impl LaplacianFilter {
    /// Builds `L_n⁺ L_n` from the orthonormalized Laplacian `L̃`.
    pub fn new(ltilde: &RealSymMatrix, n: usize) -> Result<Self> {
        Self::with_policy(ltilde, n, NullspacePolicy::Exclude)
    }

    pub fn with_policy(ltilde: &RealSymMatrix, n: usize, policy: NullspacePolicy) -> Result<Self> {
        Self::from_basis(SymEigenbasis::new(ltilde)?, n, policy)
    }

    pub fn from_basis(basis: SymEigenbasis, n: usize, policy: NullspacePolicy) -> Result<Self> {
        let len = basis.len();
        if n < 1 || n > len {
            return Err(Error::OutOfRange { index: n, len: len + 1 });
        }
        let tau = ZERO_TOL * basis.sigma_max();
        let mut filter = Self { basis, n, tau, policy, kept: Mat::zeros(len, 0) };
        let cols: Vec<usize> = (0..len).rev().filter(|&j| filter.passes(j)).collect();
        filter.kept = Mat::from_fn(len, cols.len(), |i, c| filter.basis.vectors[(i, cols[c])]);
        Ok(filter)
    }

    /// Whether eigenbasis column `j` passes the filter.
    fn passes(&self, j: usize) -> bool {
        let in_window = j >= self.basis.len() - self.n;
        in_window && (self.policy == NullspacePolicy::Retain || self.basis.eigenvalues[j].abs() > self.tau)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn policy(&self) -> NullspacePolicy {
        self.policy
    }

    pub fn rank(&self) -> usize {
        self.kept.ncols()
    }

    pub fn basis(&self) -> &SymEigenbasis {
        &self.basis
    }

    pub fn kept_vectors(&self) -> MatRef<'_, f64> {
        self.kept.as_ref()
    }

    /// Eigenvectors ordered by increasing `|λ|`: column `m` is Laplacian mode `m`.
    pub fn modes_ascending(&self) -> Mat<f64> {
        let len = self.dim();
        Mat::from_fn(len, len, |i, j| self.basis.vectors[(i, len - 1 - j)])
    }

    /// Dense projector matrix.
    pub fn projector(&self) -> Mat<f64> {
        mul_rr(self.kept.as_ref(), self.kept.transpose())
    }

    /// `P·x`.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let r = self.rank();
        let coeffs: Vec<Complex64> = (0..r)
            .map(|c| self.kept.col(c).iter().zip(x).map(|(v, xi)| xi * *v).sum())
            .collect();
        Ok((0..self.dim())
            .map(|i| (0..r).map(|c| coeffs[c] * self.kept[(i, c)]).sum())
            .collect())
    }

    /// `P·M`, computed as `V_k·(V_kᵀ·M)`.
    pub fn apply_left(&self, m: MatRef<'_, Complex64>) -> Result<Mat<Complex64>> {
        if m.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: m.nrows() });
        }
        let coeffs = crate::dense::mul_rc(self.kept.transpose(), m);
        Ok(crate::dense::mul_rc(self.kept.as_ref(), coeffs.as_ref()))
    }
}

/// Symbol of `L̃` on Fourier mode `m` of a uniform closed polygon with `n`
/// segments of length `h`.
pub fn circulant_laplacian_symbol(n: usize, h: f64, m: usize) -> f64 {
    let c = (std::f64::consts::TAU * m as f64 / n as f64).cos();
    (2.0 / h) * (1.0 - c) / (h * (2.0 / 3.0 + c / 3.0))
}

/// `P^L_n·x` on a uniform mesh in `O(N log N)` with [`NullspacePolicy::Exclude`].
pub fn circulant_filter_apply(mesh: &CurveMesh, n: usize, x: &[Complex64]) -> Result<Vec<Complex64>> {
    circulant_filter_apply_with(mesh, n, NullspacePolicy::Exclude, x)
}

/// FFT realization of the Laplacian filter. On a uniform mesh both the
/// Gram matrix and the Laplacian are circulant, so `L̃` is diagonalized by
/// the DFT with eigenvalues increasing in `min(m, N − m)`. When the window
/// ends inside a degenerate `±m` pair the cosine combination is kept.
pub fn circulant_filter_apply_with(
    mesh: &CurveMesh,
    n: usize,
    policy: NullspacePolicy,
    x: &[Complex64],
) -> Result<Vec<Complex64>> {
    let len = mesh.len();
    if !mesh.is_uniform(1e-12) {
        return Err(Error::InvalidMesh("FFT filter needs equal segment lengths".into()));
    }
    if n < 1 || n > len {
        return Err(Error::OutOfRange { index: n, len: len + 1 });
    }
    if x.len() != len {
        return Err(Error::DimensionMismatch { expected: len, got: x.len() });
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = x.to_vec();
    planner.plan_fft_forward(len).process(&mut buf);

    let mut out = vec![Complex64::new(0.0, 0.0); len];
    if policy == NullspacePolicy::Retain {
        out[0] = buf[0];
    }
    let mut remaining = n - 1;
    let mut m = 1;
    while remaining > 0 && m <= len / 2 {
        let partner = len - m;
        if partner == m {
            out[m] = buf[m];
            remaining -= 1;
        } else if remaining >= 2 {
            out[m] = buf[m];
            out[partner] = buf[partner];
            remaining -= 2;
        } else {
            let cos_part = 0.5 * (buf[m] + buf[partner]);
            out[m] = cos_part;
            out[partner] = cos_part;
            remaining -= 1;
        }
        m += 1;
    }
    planner.plan_fft_inverse(len).process(&mut out);
    let scale = 1.0 / len as f64;
    Ok(out.into_iter().map(|v| v * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly2d::{assemble_gram, assemble_laplacian};
    use crate::mesh2d::ParametricCurve;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(d: &[f64]) -> RealSymMatrix {
        RealSymMatrix::new(Mat::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { 0.0 })).unwrap()
    }

    fn random_spd(n: usize, seed: u64) -> RealSymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Mat::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        let mut g = mul_rr(a.as_ref(), a.transpose());
        for i in 0..n {
            g[(i, i)] += 0.5;
        }
        RealSymMatrix::new(symmetrized(g)).unwrap()
    }

    fn ltilde(mesh: &CurveMesh) -> RealSymMatrix {
        let (_, inv) = sym_sqrt_and_invsqrt(&assemble_gram(mesh)).unwrap();
        congruence(&inv, &assemble_laplacian(mesh)).unwrap()
    }

    #[test]
    fn square_roots_of_diagonal() {
        let (s, i) = sym_sqrt_and_invsqrt(&diag(&[4.0, 9.0])).unwrap();
        assert!((s.mat()[(0, 0)] - 2.0).abs() < 1e-15 && (s.mat()[(1, 1)] - 3.0).abs() < 1e-15);
        assert!((i.mat()[(0, 0)] - 0.5).abs() < 1e-15 && (i.mat()[(1, 1)] - 1.0 / 3.0).abs() < 1e-15);
        assert!(s.mat()[(0, 1)].abs() < 1e-15);
        let (s, i) = sym_sqrt_and_invsqrt(&diag(&[1.0; 5])).unwrap();
        assert!((s.mat() - Mat::<f64>::identity(5, 5)).norm_max() < 1e-15);
        assert!((i.mat() - Mat::<f64>::identity(5, 5)).norm_max() < 1e-15);
    }

    #[test]
    fn square_roots_round_trip() {
        let g = random_spd(50, 3);
        let (s, i) = sym_sqrt_and_invsqrt(&g).unwrap();
        let ss = mul_rr(s.mat(), s.mat());
        assert!((&ss - g.mat()).norm_max() <= 1e-10 * g.mat().norm_max());
        let igi = mul_rr(mul_rr(i.mat(), g.mat()).as_ref(), i.mat());
        assert!((&igi - Mat::<f64>::identity(50, 50)).norm_max() <= 1e-10);
    }

    #[test]
    fn indefinite_rejected() {
        assert!(matches!(sym_sqrt_and_invsqrt(&diag(&[1.0, -1.0])), Err(Error::NotPositiveDefinite { .. })));
        assert!(sym_sqrt_and_invsqrt(&diag(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn eigenbasis_invariants() {
        let g = random_spd(40, 9);
        let b = SymEigenbasis::new(&g).unwrap();
        let vtv = mul_rr(b.vectors.transpose(), b.vectors.as_ref());
        assert!((&vtv - Mat::<f64>::identity(40, 40)).norm_max() <= 1e-12);
        assert!((&b.compose(|l, _| l) - g.mat()).norm_l2() <= 1e-10 * g.mat().norm_l2());
        assert!(b.eigenvalues.windows(2).all(|w| w[0].abs() >= w[1].abs()));
    }

    #[test]
    fn filtered_matrix_keeps_smallest() {
        let x = diag(&[3.0, 2.0, 1.0]);
        let x1 = filtered_matrix(&x, 1).unwrap();
        let want = diag(&[0.0, 0.0, 1.0]);
        assert!((&x1 - want.mat()).norm_max() < 1e-15);
        assert_eq!(filtered_matrix(&x, 0).unwrap().norm_max(), 0.0);
        assert!((&filtered_matrix(&x, 3).unwrap() - x.mat()).norm_max() < 1e-14);
        assert!(filtered_matrix(&x, 4).is_err());
        // Singular values of an indefinite matrix are |λ|.
        let y = diag(&[-5.0, 0.5, 2.0]);
        let y1 = filtered_matrix(&y, 2).unwrap();
        assert!((&y1 - diag(&[0.0, 0.5, 2.0]).mat()).norm_max() < 1e-15);
    }

    #[test]
    fn filtered_pseudo_inverse_on_graph_laplacian() {
        // Path-free cycle graph on 4 nodes: eigenvalues 0, 2, 2, 4.
        let l = RealSymMatrix::new(Mat::from_fn(4, 4, |i, j| {
            if i == j {
                2.0
            } else if (i + 1) % 4 == j || (j + 1) % 4 == i {
                -1.0
            } else {
                0.0
            }
        }))
        .unwrap();
        assert_eq!(filtered_pseudo_inverse(&l, 1).unwrap().norm_max(), 0.0);
        let full = filtered_pseudo_inverse(&l, 4).unwrap();
        // L·L⁺ = I − 11ᵀ/4
        let p = mul_rr(l.mat(), full.as_ref());
        let want = Mat::from_fn(4, 4, |i, j| if i == j { 0.75 } else { -0.25 });
        assert!((&p - &want).norm_max() < 1e-14);
    }

    #[test]
    fn laplacian_filter_projector_properties() {
        let mesh = CurveMesh::build(ParametricCurve::Ellipse { a: 1.42, b: 1.32 }, 120).unwrap();
        let lt = ltilde(&mesh);
        let basis = SymEigenbasis::new(&lt).unwrap();
        let mut last_rank = 0;
        for n in [1, 2, 3, 10, 21, 60, 119, 120] {
            let f = LaplacianFilter::from_basis(basis.clone(), n, NullspacePolicy::Exclude).unwrap();
            let p = f.projector();
            assert!((&mul_rr(p.as_ref(), p.as_ref()) - &p).norm_max() <= 1e-10);
            assert!((&p - p.transpose()).norm_max() <= 1e-12);
            assert_eq!(f.rank(), n - 1);
            assert!(f.rank() >= last_rank);
            last_rank = f.rank();
            let comm = &mul_rr(p.as_ref(), lt.mat()) - &mul_rr(lt.mat(), p.as_ref());
            assert!(comm.norm_l2() <= 1e-10 * lt.mat().norm_l2());
        }
        assert!(LaplacianFilter::new(&lt, 0).is_err());
        assert!(LaplacianFilter::new(&lt, 121).is_err());
    }

    #[test]
    fn filter_annihilates_weighted_constants() {
        let mesh = CurveMesh::build(ParametricCurve::PerturbedCircle { r0: 2.0, amp: 0.2, lobes: 8 }, 96).unwrap();
        let g = assemble_gram(&mesh);
        let (sqrt, _) = sym_sqrt_and_invsqrt(&g).unwrap();
        let w: Vec<f64> = (0..96).map(|i| (0..96).map(|j| sqrt.mat()[(i, j)]).sum()).collect();
        let wc = crate::dense::complex_vec(&w);
        let lt = ltilde(&mesh);
        for n in [1, 5, 50, 96] {
            let f = LaplacianFilter::new(&lt, n).unwrap();
            assert!(crate::dense::norm2(&f.apply(&wc).unwrap()) <= 1e-10 * crate::dense::norm2(&wc));
        }
        // Full window: I − w·wᵀ/‖w‖².
        let p = LaplacianFilter::new(&lt, 96).unwrap().projector();
        let ww: f64 = w.iter().map(|v| v * v).sum();
        let want = Mat::from_fn(96, 96, |i, j| f64::from(u8::from(i == j)) - w[i] * w[j] / ww);
        assert!((&p - &want).norm_max() <= 1e-10);
        // Retaining the nullspace at full window gives the identity.
        let p = LaplacianFilter::with_policy(&lt, 96, NullspacePolicy::Retain).unwrap().projector();
        assert!((&p - Mat::<f64>::identity(96, 96)).norm_max() <= 1e-10);
    }

    #[test]
    fn circulant_symbol_matches_dense_spectrum() {
        let mesh = CurveMesh::build(ParametricCurve::circle(1.0), 64).unwrap();
        let mut dense = ltilde(&mesh).eigenvalues().unwrap();
        let mut fft: Vec<f64> = (0..64).map(|m| circulant_laplacian_symbol(64, mesh.h, m)).collect();
        dense.sort_by(|a, b| a.partial_cmp(b).unwrap());
        fft.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in dense.iter().zip(&fft) {
            assert!((a - b).abs() <= 1e-10 * fft[63]);
        }
    }

    fn random_complex(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
    }

    #[test]
    fn fft_path_matches_dense_path() {
        let mesh = CurveMesh::build(ParametricCurve::circle(1.0), 256).unwrap();
        let lt = ltilde(&mesh);
        let basis = SymEigenbasis::new(&lt).unwrap();
        let x = random_complex(256, 5);
        for n in [1, 21, 201, 256] {
            let dense = LaplacianFilter::from_basis(basis.clone(), n, NullspacePolicy::Exclude).unwrap().apply(&x).unwrap();
            let fft = circulant_filter_apply(&mesh, n, &x).unwrap();
            let err = crate::dense::rel_diff(&fft, &dense).min(crate::dense::norm2(&fft));
            assert!(err <= 1e-10, "n={n}: {err:e}");
        }
        let ones = vec![Complex64::new(1.0, 0.0); 256];
        assert!(crate::dense::norm2(&circulant_filter_apply(&mesh, 40, &ones).unwrap()) < 1e-12);
        // Full window removes the mean.
        let full = circulant_filter_apply(&mesh, 256, &x).unwrap();
        let mean: Complex64 = x.iter().sum::<Complex64>() / 256.0;
        for (f, v) in full.iter().zip(&x) {
            assert!((f - (v - mean)).norm() < 1e-12);
        }
    }

    #[test]
    fn fft_path_rejects_nonuniform_mesh() {
        let mesh = CurveMesh::build(ParametricCurve::Ellipse { a: 1.42, b: 1.32 }, 64).unwrap();
        assert!(circulant_filter_apply(&mesh, 5, &vec![Complex64::new(1.0, 0.0); 64]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn fft_filter_is_a_projector(seed in 0u64..1000, n in 1usize..=64) {
            let mesh = CurveMesh::build(ParametricCurve::circle(1.3), 64).unwrap();
            let x = random_complex(64, seed);
            let once = circulant_filter_apply(&mesh, n, &x).unwrap();
            let twice = circulant_filter_apply(&mesh, n, &once).unwrap();
            let scale = crate::dense::norm2(&x);
            let diff: Vec<Complex64> = once.iter().zip(&twice).map(|(a, b)| a - b).collect();
            prop_assert!(crate::dense::norm2(&diff) <= 1e-12 * scale);
            prop_assert!(crate::dense::norm2(&once) <= scale * (1.0 + 1e-12));
        }

        #[test]
        fn filtered_matrix_plus_complement_is_identity(seed in 0u64..1000, n in 0usize..=12) {
            let g = random_spd(12, seed);
            let b = SymEigenbasis::new(&g).unwrap();
            let first = 12 - n;
            let complement = b.compose(|l, j| if j < first { l } else { 0.0 });
            let sum = &complement + &filtered_matrix(&g, n).unwrap();
            prop_assert!((&sum - g.mat()).norm_max() <= 1e-10 * g.mat().norm_max());
        }
    }
}
