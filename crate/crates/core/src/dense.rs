//! Dense matrix containers and the handful of kernels shared by the
//! assembly, filtering and compression stages.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Side};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Relative tolerance on `‖X − Xᵀ‖_max / ‖X‖_max` for matrices flagged symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Dense complex matrix with an explicit (checked) symmetry flag.
#[derive(Debug, Clone)]
pub struct ComplexMatrix {
    mat: Mat<Complex64>,
    symmetric: bool,
}

impl ComplexMatrix {
    /// Wraps `mat`; when `symmetric` is set the flag is verified.
    pub fn new(mat: Mat<Complex64>, symmetric: bool) -> Result<Self> {
        let out = Self { mat, symmetric };
        if symmetric {
            let defect = out.symmetry_defect();
            if defect > SYMMETRY_TOL {
                return Err(Error::invalid(format!("matrix flagged symmetric has relative defect {defect:e}")));
            }
        }
        Ok(out)
    }

    pub fn general(mat: Mat<Complex64>) -> Self {
        Self { mat, symmetric: false }
    }

    pub fn nrows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn mat(&self) -> MatRef<'_, Complex64> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> Mat<Complex64> {
        self.mat
    }

    /// `‖X − Xᵀ‖_max / ‖X‖_max` (plain transpose, no conjugation).
    pub fn symmetry_defect(&self) -> f64 {
        symmetry_defect_c(self.mat.as_ref())
    }

    pub fn is_finite(&self) -> bool {
        (0..self.mat.ncols()).all(|j| self.mat.col_as_slice(j).iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

/// Dense real symmetric matrix.
#[derive(Debug, Clone)]
pub struct RealSymMatrix {
    mat: Mat<f64>,
}

impl RealSymMatrix {
    pub fn new(mat: Mat<f64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), got: mat.ncols() });
        }
        let mut defect: f64 = 0.0;
        let scale = mat.norm_max();
        for j in 0..mat.ncols() {
            for i in 0..j {
                defect = defect.max((mat[(i, j)] - mat[(j, i)]).abs());
            }
        }
        if defect > SYMMETRY_TOL * scale {
            return Err(Error::invalid(format!("matrix is not symmetric (defect {defect:e})")));
        }
        Ok(Self { mat })
    }

    pub fn nrows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> MatRef<'_, f64> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> Mat<f64> {
        self.mat
    }

    /// Eigenvalues in nondecreasing order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.mat
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Decomposition(format!("{e:?}")))
    }
}

pub(crate) fn symmetry_defect_c(m: MatRef<'_, Complex64>) -> f64 {
    let scale = m.norm_max();
    if scale == 0.0 {
        return 0.0;
    }
    let mut defect: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..j {
            defect = defect.max((m[(i, j)] - m[(j, i)]).norm());
        }
    }
    defect / scale
}

pub fn par() -> faer::Par {
    faer::get_global_parallelism()
}

/// `A·B` for complex operands.
pub fn mul_cc(a: MatRef<'_, Complex64>, b: MatRef<'_, Complex64>) -> Mat<Complex64> {
    let mut out = Mat::<Complex64>::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, Complex64::new(1.0, 0.0), par());
    out
}

/// `A·B` for real operands.
pub fn mul_rr(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Mat<f64> {
    let mut out = Mat::<f64>::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, 1.0, par());
    out
}

fn split(b: MatRef<'_, Complex64>) -> (Mat<f64>, Mat<f64>) {
    (
        Mat::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)].re),
        Mat::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)].im),
    )
}

fn join(re: &Mat<f64>, im: &Mat<f64>) -> Mat<Complex64> {
    Mat::from_fn(re.nrows(), re.ncols(), |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
}

/// `A·B` with `A` real, `B` complex, as two real products.
pub fn mul_rc(a: MatRef<'_, f64>, b: MatRef<'_, Complex64>) -> Mat<Complex64> {
    let (re, im) = split(b);
    join(&mul_rr(a, re.as_ref()), &mul_rr(a, im.as_ref()))
}

/// `A·B` with `A` complex, `B` real, as two real products.
pub fn mul_cr(a: MatRef<'_, Complex64>, b: MatRef<'_, f64>) -> Mat<Complex64> {
    let (re, im) = split(a);
    join(&mul_rr(re.as_ref(), b), &mul_rr(im.as_ref(), b))
}

/// `A·x` for a complex matrix and vector.
pub fn matvec(a: MatRef<'_, Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.ncols(), x.len());
    let mut y = vec![Complex64::new(0.0, 0.0); a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == Complex64::new(0.0, 0.0) {
            continue;
        }
        let col = a.col(j);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += col[i] * xj;
        }
    }
    y
}

/// `Aᴴ·x`.
pub fn matvec_adjoint(a: MatRef<'_, Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.nrows(), x.len());
    (0..a.ncols())
        .map(|j| {
            let col = a.col(j);
            x.iter().enumerate().map(|(i, &xi)| col[i].conj() * xi).sum()
        })
        .collect()
}

pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn complex_vec(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// `‖x − y‖₂ / ‖y‖₂`.
pub fn rel_diff(x: &[Complex64], y: &[Complex64]) -> f64 {
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    num / norm2(y)
}

/// Power-iteration estimate of the spectral norm of an operator given by
/// its action and the action of its adjoint. Starts from a seeded complex
/// Gaussian vector.
pub fn spectral_norm_estimate(
    n: usize,
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    apply_adjoint: impl Fn(&[Complex64]) -> Vec<Complex64>,
    iterations: usize,
    seed: u64,
) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Complex64> = (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let mut estimate = 0.0;
    for _ in 0..iterations.max(1) {
        let nx = norm2(&x);
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let y = apply(&x);
        estimate = norm2(&y);
        if estimate == 0.0 {
            return 0.0;
        }
        x = apply_adjoint(&y);
    }
    estimate
}

/// Complex Gaussian test matrix with independent standard normal parts.
pub fn gaussian_matrix(rng: &mut ChaCha8Rng, nrows: usize, ncols: usize) -> Mat<Complex64> {
    let mut m = Mat::<Complex64>::zeros(nrows, ncols);
    for j in 0..ncols {
        for v in m.col_as_slice_mut(j) {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *v = Complex64::new(re, im);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_flag_is_checked() {
        let m = Mat::from_fn(3, 3, |i, j| Complex64::new((i + j) as f64, (i * j) as f64));
        assert!(ComplexMatrix::new(m, true).is_ok());
        let m = Mat::from_fn(3, 3, |i, j| Complex64::new(i as f64, j as f64));
        assert!(ComplexMatrix::new(m, true).is_err());
    }

    #[test]
    fn mixed_products_match_complex_product() {
        let a = Mat::from_fn(7, 5, |i, j| (i as f64 - 2.0 * j as f64).sin());
        let b = Mat::from_fn(5, 4, |i, j| Complex64::new((i + j) as f64, (i as f64) - 0.5 * j as f64));
        let ac = Mat::from_fn(7, 5, |i, j| Complex64::new(a[(i, j)], 0.0));
        let want = mul_cc(ac.as_ref(), b.as_ref());
        let got = mul_rc(a.as_ref(), b.as_ref());
        assert!((&want - &got).norm_max() < 1e-13);
        let bt = b.transpose().to_owned();
        let at = a.transpose().to_owned();
        let got_t = mul_cr(bt.as_ref(), at.as_ref());
        assert!((&want.transpose().to_owned() - &got_t).norm_max() < 1e-13);
    }

    #[test]
    fn power_iteration_finds_diagonal_norm() {
        let d = [3.0, -7.5, 1.0, 0.5];
        let est = spectral_norm_estimate(
            4,
            |x| x.iter().zip(d).map(|(v, s)| v * s).collect(),
            |x| x.iter().zip(d).map(|(v, s)| v * s).collect(),
            50,
            1,
        );
        assert!((est - 7.5).abs() < 1e-8);
    }
}
