//! Gram-normalized Calderón TE-EFIE and TE-MFIE, and their
//! Laplacian-filtered second-kind forms `βI + P·C`.
//!
//! All systems act on normalized coefficients `j̃ = G^{1/2}·j`. With
//! `X̃ = G^{-1/2}·X·G^{-1/2}`:
//!
//! * EFIE: `Z₂ = S̃·Ñ = I/4 + C₂`, right-hand side
//!   `v_e = −(ik/η)·S̃·G^{-1/2}·e₂`;
//! * MFIE: `(I/2 − D̃)·j̃ = v_h` with `v_h = −G^{-1/2}·h₂`;
//! * CFIE: EFIE plus `α` times MFIE, `β = (1 + 2α)/4`.
//!
//! The EFIE is the Calderón-preconditioned form of `N·j = −(ik/η)·e`:
//! composing with `S` gives an operator accumulating at `+1/4`, so the
//! wavenumber factor sits on the right-hand side rather than on `Z₂`.

use faer::Mat;
use num_complex::Complex64;

use crate::assembly2d::{assemble_gram, assemble_laplacian, assemble_operators, Kernel, OperatorRequest, QuadratureConfig, ScatteringParams};
use crate::dense::{matvec, mul_cc, mul_cr, mul_rc, ComplexMatrix, RealSymMatrix};
use crate::error::{Error, Result};
use crate::excitation2d::{assemble_rhs, Source2D};
use crate::mesh2d::CurveMesh;
use crate::spectral::{congruence, sym_sqrt_and_invsqrt, LaplacianFilter, NullspacePolicy, SymEigenbasis};

/// Which second-kind equation to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Formulation {
    Efie,
    Mfie,
    Cfie { alpha: f64 },
}

impl Formulation {
    /// Default combined-field coupling.
    pub const DEFAULT_ALPHA: f64 = 0.5;

    pub fn beta(&self) -> f64 {
        match *self {
            Formulation::Efie => 0.25,
            Formulation::Mfie => 0.5,
            Formulation::Cfie { alpha } => (1.0 + 2.0 * alpha) / 4.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Formulation::Efie => "efie",
            Formulation::Mfie => "mfie",
            Formulation::Cfie { .. } => "cfie",
        }
    }

    fn validate(&self) -> Result<()> {
        if let Formulation::Cfie { alpha } = *self {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::invalid(format!("CFIE coupling must be positive, got {alpha}")));
            }
        }
        Ok(())
    }

    fn needs_efie(&self) -> bool {
        !matches!(self, Formulation::Mfie)
    }

    fn needs_mfie(&self) -> bool {
        !matches!(self, Formulation::Efie)
    }
}

/// Single-layer kernel used to precondition the hypersingular operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    /// Helmholtz single layer at the physical wavenumber `k`.
    #[default]
    Helmholtz,
    /// Single layer at imaginary wavenumber `ik` (modified Bessel kernel).
    Yukawa,
}

/// Sign of the double-layer block in the MFIE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MfieSign {
    /// `(I/2 − D̃)`.
    #[default]
    Minus,
    /// `(I/2 + D̃)`.
    Plus,
}

impl MfieSign {
    fn factor(self) -> f64 {
        match self {
            MfieSign::Minus => -1.0,
            MfieSign::Plus => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalderonOptions {
    pub quadrature: QuadratureConfig,
    pub preconditioner: Preconditioner,
    pub mfie_sign: MfieSign,
    /// Whether the filter passes the Laplacian nullspace (constant
    /// normalized current) when it lies inside the window.
    pub nullspace: NullspacePolicy,
}

impl Default for CalderonOptions {
    fn default() -> Self {
        Self {
            quadrature: QuadratureConfig::default(),
            preconditioner: Preconditioner::Helmholtz,
            mfie_sign: MfieSign::Minus,
            nullspace: NullspacePolicy::Retain,
        }
    }
}

/// `G^{-1/2}·X·G^{-1/2}`.
pub fn normalize(g_invsqrt: &RealSymMatrix, x: &ComplexMatrix) -> Mat<Complex64> {
    let left = mul_rc(g_invsqrt.mat(), x.mat());
    mul_cr(left.as_ref(), g_invsqrt.mat())
}

/// `Z₂ − I/4`.
pub fn build_c2(z2: &ComplexMatrix) -> ComplexMatrix {
    let mut c = z2.mat().to_owned();
    for i in 0..c.nrows() {
        c[(i, i)] -= Complex64::new(0.25, 0.0);
    }
    ComplexMatrix::general(c)
}

/// Normalized operators and right-hand sides of one discretization.
#[derive(Debug, Clone)]
pub struct NormalizedOperators {
    pub mesh: CurveMesh,
    pub params: ScatteringParams,
    pub options: CalderonOptions,
    /// `S̃·Ñ`, present when the EFIE part was requested.
    pub z2: Option<ComplexMatrix>,
    /// `D̃`, present when the MFIE part was requested.
    pub dtilde: Option<ComplexMatrix>,
    pub v_e: Option<Vec<Complex64>>,
    pub v_h: Option<Vec<Complex64>>,
    pub g_sqrt: RealSymMatrix,
    /// Orthonormalized Laplacian `L̃ = G^{-1/2}·L·G^{-1/2}`.
    pub ltilde: RealSymMatrix,
}

impl NormalizedOperators {
    /// Assembles what `formulation` needs. Passing `src = None` skips the
    /// right-hand sides.
    pub fn build(
        mesh: &CurveMesh,
        params: ScatteringParams,
        src: Option<&Source2D>,
        formulation: Formulation,
        options: CalderonOptions,
    ) -> Result<Self> {
        formulation.validate()?;
        let k = params.k;
        let (g_sqrt, g_invsqrt) = sym_sqrt_and_invsqrt(&assemble_gram(mesh))?;
        let ltilde = congruence(&g_invsqrt, &assemble_laplacian(mesh))?;

        let sl_kernel = match options.preconditioner {
            Preconditioner::Helmholtz => Kernel::Helmholtz { k },
            Preconditioner::Yukawa => Kernel::Yukawa { k },
        };
        let req = OperatorRequest {
            single_layer: formulation.needs_efie().then_some(sl_kernel),
            hypersingular: formulation.needs_efie(),
            double_layer: formulation.needs_mfie(),
        };
        let ops = assemble_operators(mesh, k, req, &options.quadrature)?;
        let rhs = src.map(|s| assemble_rhs(mesh, s, k, params.eta)).transpose()?;

        let mut z2 = None;
        let mut v_e = None;
        if let (Some(s), Some(n)) = (ops.single_layer, ops.hypersingular) {
            let s_t = normalize(&g_invsqrt, &s);
            drop(s);
            let n_t = normalize(&g_invsqrt, &n);
            drop(n);
            if let Some((e2, _)) = &rhs {
                let ge = matvec(complex_of(&g_invsqrt).as_ref(), e2);
                let scale = Complex64::new(0.0, -k / params.eta);
                v_e = Some(matvec(s_t.as_ref(), &ge).into_iter().map(|v| v * scale).collect());
            }
            z2 = Some(ComplexMatrix::general(mul_cc(s_t.as_ref(), n_t.as_ref())));
        }
        let mut dtilde = None;
        let mut v_h = None;
        if let Some(d) = ops.double_layer {
            dtilde = Some(ComplexMatrix::general(normalize(&g_invsqrt, &d)));
            if let Some((_, h2)) = &rhs {
                v_h = Some(matvec(complex_of(&g_invsqrt).as_ref(), h2).into_iter().map(|v| -v).collect());
            }
        }
        Ok(Self { mesh: mesh.clone(), params, options, z2, dtilde, v_e, v_h, g_sqrt, ltilde })
    }

    /// Filter of window `n` on this discretization, using the configured
    /// nullspace policy.
    pub fn laplacian_filter(&self, n: usize) -> Result<LaplacianFilter> {
        LaplacianFilter::with_policy(&self.ltilde, n, self.options.nullspace)
    }

    /// Eigenbasis of `L̃`, for building several filters.
    pub fn laplacian_basis(&self) -> Result<SymEigenbasis> {
        SymEigenbasis::new(&self.ltilde)
    }

    /// Unfiltered compact part `C` of `formulation` (so the system is `βI + C`).
    pub fn compact(&self, formulation: Formulation) -> Result<Mat<Complex64>> {
        formulation.validate()?;
        let sign = self.options.mfie_sign.factor();
        let missing = || Error::invalid(format!("operators for {} were not assembled", formulation.name()));
        match formulation {
            Formulation::Efie => Ok(build_c2(self.z2.as_ref().ok_or_else(missing)?).into_mat()),
            Formulation::Mfie => {
                let d = self.dtilde.as_ref().ok_or_else(missing)?;
                Ok(Mat::from_fn(d.nrows(), d.nrows(), |i, j| d.mat()[(i, j)] * sign))
            }
            Formulation::Cfie { alpha } => {
                let c2 = build_c2(self.z2.as_ref().ok_or_else(missing)?).into_mat();
                let d = self.dtilde.as_ref().ok_or_else(missing)?;
                Ok(Mat::from_fn(c2.nrows(), c2.nrows(), |i, j| c2[(i, j)] + d.mat()[(i, j)] * (alpha * sign)))
            }
        }
    }

    /// Right-hand side of `formulation`.
    pub fn rhs(&self, formulation: Formulation) -> Result<Vec<Complex64>> {
        let missing = || Error::invalid("right-hand side was not assembled");
        match formulation {
            Formulation::Efie => self.v_e.clone().ok_or_else(missing),
            Formulation::Mfie => self.v_h.clone().ok_or_else(missing),
            Formulation::Cfie { alpha } => {
                let (e, h) = (self.v_e.as_ref().ok_or_else(missing)?, self.v_h.as_ref().ok_or_else(missing)?);
                Ok(e.iter().zip(h).map(|(a, b)| a + b * alpha).collect())
            }
        }
    }

    /// `βI + C` without filtering: the reference system.
    pub fn unfiltered_system(&self, formulation: Formulation) -> Result<FilteredSystem> {
        let n = self.mesh.len();
        Ok(FilteredSystem {
            beta: formulation.beta(),
            compact: ComplexMatrix::general(self.compact(formulation)?),
            rhs: self.rhs(formulation).unwrap_or_default(),
            formulation,
            filter_n: n,
        })
    }

    /// `βI + P·C` with `P = filter`.
    pub fn filtered_system(&self, formulation: Formulation, filter: &LaplacianFilter) -> Result<FilteredSystem> {
        let c = self.compact(formulation)?;
        Ok(FilteredSystem {
            beta: formulation.beta(),
            compact: ComplexMatrix::general(filter.apply_left(c.as_ref())?),
            rhs: self.rhs(formulation).unwrap_or_default(),
            formulation,
            filter_n: filter.n(),
        })
    }
}

fn complex_of(m: &RealSymMatrix) -> Mat<Complex64> {
    Mat::from_fn(m.nrows(), m.nrows(), |i, j| Complex64::new(m.mat()[(i, j)], 0.0))
}

/// A second-kind system `(βI + C)·j̃ = rhs`.
#[derive(Debug, Clone)]
pub struct FilteredSystem {
    pub beta: f64,
    /// Filtered compact block, before compression.
    pub compact: ComplexMatrix,
    pub rhs: Vec<Complex64>,
    pub formulation: Formulation,
    pub filter_n: usize,
}

impl FilteredSystem {
    pub fn len(&self) -> usize {
        self.compact.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dense `βI + C`.
    pub fn dense_matrix(&self) -> Mat<Complex64> {
        let mut a = self.compact.mat().to_owned();
        for i in 0..a.nrows() {
            a[(i, i)] += Complex64::new(self.beta, 0.0);
        }
        a
    }
}

/// `Z₂` on `mesh` at wavenumber `k`.
pub fn build_z2(mesh: &CurveMesh, k: f64, options: &CalderonOptions) -> Result<ComplexMatrix> {
    let params = ScatteringParams::new(k, 1.0)?;
    let ops = NormalizedOperators::build(mesh, params, None, Formulation::Efie, *options)?;
    Ok(ops.z2.expect("EFIE operators requested"))
}

/// One-shot construction of a filtered system with window `n`.
pub fn build_filtered_system(
    mesh: &CurveMesh,
    params: ScatteringParams,
    src: &Source2D,
    formulation: Formulation,
    n: usize,
    options: &CalderonOptions,
) -> Result<FilteredSystem> {
    if n < 1 || n > mesh.len() {
        return Err(Error::OutOfRange { index: n, len: mesh.len() + 1 });
    }
    let ops = NormalizedOperators::build(mesh, params, Some(src), formulation, *options)?;
    let filter = ops.laplacian_filter(n)?;
    ops.filtered_system(formulation, &filter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::mesh2d::ParametricCurve;

    fn circle_ops(n: usize, formulation: Formulation, options: CalderonOptions) -> NormalizedOperators {
        let mesh = CurveMesh::build(ParametricCurve::circle(1.0), n).unwrap();
        let params = ScatteringParams::new(0.4, 1.0).unwrap();
        let src = Source2D::line_source(Vec2::new(3.0, 0.0));
        NormalizedOperators::build(&mesh, params, Some(&src), formulation, options).unwrap()
    }

    fn solve(a: Mat<Complex64>, b: &[Complex64]) -> Vec<Complex64> {
        use faer::linalg::solvers::Solve;
        let lu = a.partial_piv_lu();
        let mut x = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        lu.solve_in_place(x.as_mut());
        x.col_as_slice(0).to_vec()
    }

    fn fraction_near_quarter(z: &ComplexMatrix) -> f64 {
        let ev = z.mat().eigenvalues().unwrap();
        ev.iter().filter(|l| (**l - Complex64::new(0.25, 0.0)).norm() <= 0.1).count() as f64 / ev.len() as f64
    }

    #[test]
    fn calderon_spectrum_clusters_at_a_quarter() {
        let z128 = build_z2(&CurveMesh::build(ParametricCurve::circle(1.0), 128).unwrap(), 0.4, &Default::default()).unwrap();
        let z256 = build_z2(&CurveMesh::build(ParametricCurve::circle(1.0), 256).unwrap(), 0.4, &Default::default()).unwrap();
        let (f128, f256) = (fraction_near_quarter(&z128), fraction_near_quarter(&z256));
        assert!(f128 >= 0.8 && f256 >= f128, "{f128} {f256}");
    }

    #[test]
    fn c2_is_z2_minus_quarter() {
        let z = ComplexMatrix::general(Mat::from_fn(4, 4, |i, j| Complex64::new(if i == j { 0.25 } else { 0.0 }, 0.0)));
        assert_eq!(build_c2(&z).mat().norm_max(), 0.0);
        let ops = circle_ops(32, Formulation::Efie, Default::default());
        let z = ops.z2.as_ref().unwrap();
        let c = build_c2(z);
        for i in 0..32 {
            assert_eq!(z.mat()[(i, i)] - c.mat()[(i, i)], Complex64::new(0.25, 0.0));
        }
    }

    #[test]
    fn z2_is_rotation_invariant_on_the_circle() {
        let ops = circle_ops(64, Formulation::Efie, Default::default());
        let z = ops.z2.unwrap();
        let scale = z.mat().norm_max();
        for i in 0..64 {
            for j in 0..64 {
                let shifted = z.mat()[((i + 5) % 64, (j + 5) % 64)];
                assert!((z.mat()[(i, j)] - shifted).norm() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn efie_and_mfie_give_the_same_current() {
        let ops = circle_ops(128, Formulation::Cfie { alpha: 0.5 }, Default::default());
        let e = ops.unfiltered_system(Formulation::Efie).unwrap();
        let m = ops.unfiltered_system(Formulation::Mfie).unwrap();
        let je = solve(e.dense_matrix(), &e.rhs);
        let jm = solve(m.dense_matrix(), &m.rhs);
        let err = crate::dense::rel_diff(&jm, &je);
        assert!(err < 1e-2, "relative EFIE/MFIE mismatch {err:e}");
        let c = ops.unfiltered_system(Formulation::Cfie { alpha: 0.5 }).unwrap();
        let jc = solve(c.dense_matrix(), &c.rhs);
        assert!(crate::dense::rel_diff(&jc, &je) < 1e-2);
    }

    #[test]
    fn cfie_beta() {
        assert_eq!(Formulation::Cfie { alpha: 0.5 }.beta(), 0.5);
        assert_eq!(Formulation::Efie.beta(), 0.25);
        assert!(Formulation::Cfie { alpha: -1.0 }.validate().is_err());
    }

    #[test]
    fn full_window_filter_reproduces_unfiltered_solution() {
        let ops = circle_ops(96, Formulation::Efie, Default::default());
        let reference = ops.unfiltered_system(Formulation::Efie).unwrap();
        let j_ref = solve(reference.dense_matrix(), &reference.rhs);
        // Retaining the nullspace, the full window is the identity.
        let sys = ops.filtered_system(Formulation::Efie, &ops.laplacian_filter(96).unwrap()).unwrap();
        let j = solve(sys.dense_matrix(), &sys.rhs);
        assert!(crate::dense::rel_diff(&j, &j_ref) <= 1e-12);
        // Excluding it, agreement holds away from the constant mode.
        let strict = LaplacianFilter::new(&ops.ltilde, 96).unwrap();
        let sys = ops.filtered_system(Formulation::Efie, &strict).unwrap();
        let j = solve(sys.dense_matrix(), &sys.rhs);
        let pj = strict.apply(&j).unwrap();
        let pref = strict.apply(&j_ref).unwrap();
        assert!(crate::dense::rel_diff(&pj, &pref) <= 1e-8);
    }

    #[test]
    fn filtered_mfie_matches_dense_mfie() {
        let ops = circle_ops(256, Formulation::Mfie, Default::default());
        let reference = ops.unfiltered_system(Formulation::Mfie).unwrap();
        let j_ref = solve(reference.dense_matrix(), &reference.rhs);
        let sys = ops.filtered_system(Formulation::Mfie, &ops.laplacian_filter(64).unwrap()).unwrap();
        let j = solve(sys.dense_matrix(), &sys.rhs);
        let err = crate::dense::rel_diff(&j, &j_ref);
        assert!(err <= 1e-3, "{err:e}");
    }

    #[test]
    fn yukawa_preconditioner_also_clusters() {
        let mesh = CurveMesh::build(ParametricCurve::Ellipse { a: 1.42, b: 1.32 }, 128).unwrap();
        let opts = CalderonOptions { preconditioner: Preconditioner::Yukawa, ..Default::default() };
        let z = build_z2(&mesh, 0.4, &opts).unwrap();
        assert!(fraction_near_quarter(&z) >= 0.8);
    }
}
