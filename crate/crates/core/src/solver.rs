//! Direct solvers: the Woodbury inverse of `βI + U·Vᵀ` and a dense LU
//! reference.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use num_complex::Complex64;

use crate::compression::LowRankFactor;
use crate::error::{Error, Result};

/// Largest admissible condition number of the Woodbury core.
pub const MAX_CORE_CONDITION: f64 = 1e12;

/// Factorized `(βI + U·Vᵀ)⁻¹ = I/β − β⁻²·U·(I_r + β⁻¹·VᵀU)⁻¹·Vᵀ`.
#[derive(Debug)]
pub struct WoodburyInverse {
    beta: f64,
    u: Mat<Complex64>,
    v: Mat<Complex64>,
    core: Option<PartialPivLu<Complex64>>,
    core_condition: f64,
}

impl WoodburyInverse {
    pub fn factorize(beta: f64, skel: &LowRankFactor) -> Result<Self> {
        Self::from_factors(beta, skel.u.clone(), skel.v.clone())
    }

    pub fn from_factors(beta: f64, u: Mat<Complex64>, v: Mat<Complex64>) -> Result<Self> {
        if !(beta != 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be finite and nonzero, got {beta}")));
        }
        if u.nrows() != v.nrows() || u.ncols() != v.ncols() {
            return Err(Error::DimensionMismatch { expected: u.nrows(), got: v.nrows() });
        }
        let r = u.ncols();
        if r == 0 {
            return Ok(Self { beta, u, v, core: None, core_condition: 1.0 });
        }
        let vtu = crate::dense::mul_cc(v.transpose(), u.as_ref());
        let core = Mat::from_fn(r, r, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            Complex64::new(id, 0.0) + vtu[(i, j)] / beta
        });
        let sv = core.singular_values().map_err(|e| Error::Decomposition(format!("{e:?}")))?;
        let (max, min) = (sv[0], sv[r - 1]);
        let cond = if min > 0.0 { max / min } else { f64::INFINITY };
        if !(cond <= MAX_CORE_CONDITION) {
            return Err(Error::Singular(format!("Woodbury core condition number {cond:e}")));
        }
        Ok(Self { beta, u, v, core: Some(core.partial_piv_lu()), core_condition: cond })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn core_condition(&self) -> f64 {
        self.core_condition
    }

    /// `x = b/β − β⁻²·U·core⁻¹·(Vᵀb)` in `O(N·r)`.
    pub fn apply(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        let inv_beta = 1.0 / self.beta;
        let mut x: Vec<Complex64> = b.iter().map(|v| v * inv_beta).collect();
        let Some(core) = &self.core else { return Ok(x) };
        let r = self.rank();
        let mut t = Mat::<Complex64>::zeros(r, 1);
        for c in 0..r {
            t[(c, 0)] = self.v.col_as_slice(c).iter().zip(b).map(|(a, bi)| a * bi).sum();
        }
        core.solve_in_place(t.as_mut());
        let scale = inv_beta * inv_beta;
        for c in 0..r {
            let coeff = t[(c, 0)] * scale;
            for (xi, ui) in x.iter_mut().zip(self.u.col_as_slice(c)) {
                *xi -= ui * coeff;
            }
        }
        Ok(x)
    }

    /// Column-by-column [`apply`](Self::apply) on a block of right-hand sides.
    pub fn apply_block(&self, b: &Mat<Complex64>) -> Result<Mat<Complex64>> {
        if b.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: b.nrows() });
        }
        let mut out = Mat::<Complex64>::zeros(b.nrows(), b.ncols());
        for j in 0..b.ncols() {
            let x = self.apply(b.col_as_slice(j))?;
            out.col_as_slice_mut(j).copy_from_slice(&x);
        }
        Ok(out)
    }

    pub fn memory_report(&self) -> MemoryReport {
        memory_report(self.dim(), self.rank())
    }
}

/// Storage of a skeleton inverse against the dense matrix it replaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryReport {
    pub n: usize,
    pub rank: usize,
    /// `16·(2·N·r + r²)`.
    pub skeleton_bytes: usize,
    /// `16·N²`.
    pub dense_bytes: usize,
}

impl MemoryReport {
    pub fn skeleton_mb(&self) -> f64 {
        self.skeleton_bytes as f64 / 1e6
    }

    pub fn dense_mb(&self) -> f64 {
        self.dense_bytes as f64 / 1e6
    }
}

pub fn memory_report(n: usize, rank: usize) -> MemoryReport {
    MemoryReport { n, rank, skeleton_bytes: 16 * (2 * n * rank + rank * rank), dense_bytes: 16 * n * n }
}

/// LU with partial pivoting of a dense square matrix.
#[derive(Debug)]
pub struct DenseLu {
    lu: PartialPivLu<Complex64>,
    n: usize,
}

impl DenseLu {
    pub fn factorize(a: &Mat<Complex64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
        }
        Ok(Self { lu: a.partial_piv_lu(), n: a.nrows() })
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: b.len() });
        }
        let mut x = Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(x.as_mut());
        Ok(x.col_as_slice(0).to_vec())
    }
}

/// Solves `A·x = b` by LU; fails when the relative residual exceeds `1e-8`.
pub fn dense_solve(a: &Mat<Complex64>, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let x = DenseLu::factorize(a)?.solve(b)?;
    let ax = crate::dense::matvec(a.as_ref(), &x);
    let bn = crate::dense::norm2(b);
    let res = ax.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
    let scale = a.norm_max() * crate::dense::norm2(&x) + bn;
    if !res.is_finite() || x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) || res > 1e-8 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Singular(format!("dense solve residual {res:e}")));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{gaussian_matrix, rel_diff};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_of(beta: f64, u: &Mat<Complex64>, v: &Mat<Complex64>) -> Mat<Complex64> {
        let mut a = crate::dense::mul_cc(u.as_ref(), v.transpose());
        for i in 0..a.nrows() {
            a[(i, i)] += Complex64::new(beta, 0.0);
        }
        a
    }

    #[test]
    fn rank_zero_divides_by_beta() {
        let w = WoodburyInverse::from_factors(0.25, Mat::zeros(5, 0), Mat::zeros(5, 0)).unwrap();
        let b: Vec<Complex64> = (0..5).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let x = w.apply(&b).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert_eq!(*xi, bi * 4.0);
        }
        assert_eq!(w.memory_report().skeleton_bytes, 0);
    }

    #[test]
    fn matches_dense_inverse_and_zero_maps_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u = gaussian_matrix(&mut rng, 50, 5) * faer::Scale(Complex64::new(0.05, 0.0));
        let v = gaussian_matrix(&mut rng, 50, 5) * faer::Scale(Complex64::new(0.05, 0.0));
        let w = WoodburyInverse::from_factors(0.25, u.clone(), v.clone()).unwrap();
        let a = dense_of(0.25, &u, &v);
        let b = gaussian_matrix(&mut rng, 50, 1);
        let x = w.apply(b.col_as_slice(0)).unwrap();
        let x_ref = dense_solve(&a, b.col_as_slice(0)).unwrap();
        assert!(rel_diff(&x, &x_ref) <= 1e-12);
        let zero = vec![Complex64::new(0.0, 0.0); 50];
        assert!(w.apply(&zero).unwrap().iter().all(|v| v.norm() == 0.0));
        assert!(w.apply(&zero[..10]).is_err());
    }

    #[test]
    fn block_apply_is_bitwise_single_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = gaussian_matrix(&mut rng, 64, 7);
        let v = gaussian_matrix(&mut rng, 64, 7);
        let w = WoodburyInverse::from_factors(0.5, u, v).unwrap();
        let b = gaussian_matrix(&mut rng, 64, 10);
        let block = w.apply_block(&b).unwrap();
        for j in 0..10 {
            let single = w.apply(b.col_as_slice(j)).unwrap();
            for i in 0..64 {
                assert_eq!(block[(i, j)].re.to_bits(), single[i].re.to_bits());
                assert_eq!(block[(i, j)].im.to_bits(), single[i].im.to_bits());
            }
        }
    }

    #[test]
    fn singular_core_rejected() {
        // β = −1 with U = V = e₁ makes βI + UVᵀ singular.
        let e1 = Mat::from_fn(4, 1, |i, _| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        assert!(matches!(WoodburyInverse::from_factors(-1.0, e1.clone(), e1), Err(Error::Singular(_))));
        assert!(WoodburyInverse::from_factors(0.0, Mat::zeros(3, 0), Mat::zeros(3, 0)).is_err());
    }

    #[test]
    fn memory_matches_dense_arithmetic() {
        assert!((memory_report(1004, 0).dense_mb() - 16.13).abs() < 0.01);
        assert!((memory_report(8032, 0).dense_mb() - 1032.2).abs() < 0.1);
        assert_eq!(memory_report(100, 3).skeleton_bytes, 16 * (600 + 9));
        // Affine in N at fixed rank.
        let m = |n| memory_report(n, 17).skeleton_bytes as i64;
        assert_eq!(m(300) - m(200), m(200) - m(100));
    }

    #[test]
    fn dense_solve_identity_and_hilbert() {
        let id = Mat::<Complex64>::identity(6, 6);
        let b: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64, -1.0)).collect();
        assert_eq!(dense_solve(&id, &b).unwrap(), b);
        // H·x = H·1 for the 6×6 Hilbert matrix.
        let h = Mat::from_fn(6, 6, |i, j| Complex64::new(1.0 / (i + j + 1) as f64, 0.0));
        let ones = vec![Complex64::new(1.0, 0.0); 6];
        let rhs = crate::dense::matvec(h.as_ref(), &ones);
        let x = dense_solve(&h, &rhs).unwrap();
        assert!(rel_diff(&x, &ones) < 1e-9);
        let singular = Mat::<Complex64>::zeros(3, 3);
        assert!(dense_solve(&singular, &[Complex64::new(1.0, 0.0); 3]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn woodbury_equals_dense_inverse(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(2..=100);
            let r = rng.random_range(0..=20.min(n));
            let beta = if rng.random::<bool>() { 0.25 } else { rng.random_range(0.2..2.0) };
            let s = Complex64::new(0.3 / (n as f64).sqrt(), 0.0);
            let u = gaussian_matrix(&mut rng, n, r) * faer::Scale(s);
            let v = gaussian_matrix(&mut rng, n, r) * faer::Scale(s);
            let w = WoodburyInverse::from_factors(beta, u.clone(), v.clone()).unwrap();
            let b = gaussian_matrix(&mut rng, n, 1);
            let x = w.apply(b.col_as_slice(0)).unwrap();
            let x_ref = DenseLu::factorize(&dense_of(beta, &u, &v)).unwrap().solve(b.col_as_slice(0)).unwrap();
            prop_assert!(rel_diff(&x, &x_ref) <= 1e-11);
        }
    }
}
