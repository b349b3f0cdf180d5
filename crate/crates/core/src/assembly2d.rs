//! Galerkin matrices of the 2D Helmholtz boundary operators on a
//! [`CurveMesh`] with piecewise-linear hat functions.
//!
//! Conventions: `g(r, r') = (i/4)·H₀⁽¹⁾(k|r − r'|)`, normals point outward,
//! and
//!
//! * `[S]_ij = ⟨φ_i, S φ_j⟩` with `S u = ∫ g u`,
//! * `[D]_ij = ⟨φ_i, D φ_j⟩` with `D u = ∫ ∂g/∂n' u`,
//! * `[N]_ij = ⟨φ_i, N φ_j⟩` with `N u = −∂/∂n ∫ ∂g/∂n' u`.
//!
//! `N` is assembled from its integration-by-parts form
//! `⟨φ_i, N φ_j⟩ = ∬ g·(φ_i' φ_j' − k² n·n' φ_i φ_j)`, which makes it
//! symmetric and gives `S·N = I/4 + compact` with a `+1/4` accumulation
//! point. With these signs the Laplace-limit double layer maps constants to
//! `−1/2`.
//!
//! Singular quadrature: the kernel is split as `−ln|r − r'|/(2π)` plus a
//! smooth remainder. On a segment paired with itself the integral is
//! rewritten in the offset variable `w = |x − y|`; on segments sharing a
//! vertex a Duffy transform collapses the corner. In both cases the
//! logarithm lands on a single variable and is integrated with a
//! log-weighted product rule, the remainder with Gauss–Legendre.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use crate::dense::{ComplexMatrix, RealSymMatrix};
use crate::error::{Error, Result};
use crate::mesh2d::CurveMesh;
use crate::quadrature::{GaussLegendre, LogWeighted};
use crate::special::{h0_unchecked, h1_unchecked, k0_unchecked};

pub use crate::special::hankel_h1_0;

const INV_2PI: f64 = 0.5 / PI;

/// Wavenumber and impedance of the background medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringParams {
    /// Wavenumber `k = ω√(με)` in rad/m.
    pub k: f64,
    /// Impedance `η = √(μ/ε)` in ohms.
    pub eta: f64,
}

impl ScatteringParams {
    pub fn new(k: f64, eta: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid(format!("wavenumber must be positive, got {k}")));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!("impedance must be positive, got {eta}")));
        }
        Ok(Self { k, eta })
    }
}

/// Free-space Green's function used by a single-layer assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// `(i/4)·H₀⁽¹⁾(k d)`.
    Helmholtz { k: f64 },
    /// `K₀(k d)/(2π)`, the Helmholtz kernel at imaginary wavenumber `ik`.
    Yukawa { k: f64 },
}

impl Kernel {
    #[inline]
    pub fn value(&self, d: f64) -> Complex64 {
        match *self {
            Kernel::Helmholtz { k } => {
                let h = h0_unchecked(k * d);
                Complex64::new(-0.25 * h.im, 0.25 * h.re)
            }
            Kernel::Yukawa { k } => Complex64::new(INV_2PI * k0_unchecked(k * d), 0.0),
        }
    }

    /// `value(d) + ln(d)/(2π)`, bounded as `d → 0`.
    #[inline]
    pub fn remainder(&self, d: f64) -> Complex64 {
        self.value(d) + Complex64::new(INV_2PI * d.ln(), 0.0)
    }
}

/// Quadrature orders of the pair integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss order for touching and nearby segment pairs.
    pub order: usize,
    /// Gauss order for well-separated pairs.
    pub far_order: usize,
    /// Pairs whose midpoint distance exceeds `far_ratio` times the longer
    /// segment use `far_order`.
    pub far_ratio: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { order: 8, far_order: 5, far_ratio: 6.0 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order < 2 || self.far_order < 2 {
            return Err(Error::invalid(format!(
                "quadrature orders must be at least 2, got order={} far_order={}",
                self.order, self.far_order
            )));
        }
        if !(self.far_ratio > 1.0) {
            return Err(Error::invalid("far_ratio must exceed 1"));
        }
        Ok(())
    }

    /// Same configuration with both Gauss orders doubled.
    pub fn doubled(&self) -> Self {
        Self { order: 2 * self.order, far_order: 2 * self.far_order, far_ratio: self.far_ratio }
    }
}

/// Local 2×2 blocks of one (test segment, trial segment) pair. Index `p`
/// is the test-side hat (0 = start node, 1 = end node), `q` the trial side.
#[derive(Debug, Clone, Copy, Default)]
struct PairBlocks {
    single: [[Complex64; 2]; 2],
    /// `∬ ψ_p ψ_q ∂g/∂n_trial`.
    double: [[Complex64; 2]; 2],
    /// `∬ ψ_p ψ_q ∂g/∂n_test`, i.e. the transposed pair's double layer.
    double_t: [[Complex64; 2]; 2],
}

struct PairIntegrator {
    near: GaussLegendre,
    far: GaussLegendre,
    log: LogWeighted,
    far_ratio: f64,
}

#[inline]
fn hat(p: usize, x: f64) -> f64 {
    if p == 0 { 1.0 - x } else { x }
}

/// `∂g/∂n'` for the Helmholtz kernel: `−(ik/4)·H₁⁽¹⁾(k d)·(n'·(r' − r))/d`.
#[inline]
fn dl_kernel(k: f64, d: f64, proj: f64) -> Complex64 {
    let h = h1_unchecked(k * d);
    // −(ik/4)·h = (k/4)·(h.im − i·h.re)
    Complex64::new(0.25 * k * h.im, -0.25 * k * h.re) * (proj / d)
}

enum Touch {
    None,
    Same,
    /// Test segment ends where the trial segment starts.
    TestEndTrialStart,
    /// Test segment starts where the trial segment ends.
    TestStartTrialEnd,
}

impl PairIntegrator {
    fn new(cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            near: GaussLegendre::new(cfg.order)?,
            far: GaussLegendre::new(cfg.far_order)?,
            log: LogWeighted::new(8)?,
            far_ratio: cfg.far_ratio,
        })
    }

    fn touch(mesh: &CurveMesh, a: usize, b: usize) -> Touch {
        let n = mesh.len();
        if a == b {
            Touch::Same
        } else if (a + 1) % n == b {
            Touch::TestEndTrialStart
        } else if (b + 1) % n == a {
            Touch::TestStartTrialEnd
        } else {
            Touch::None
        }
    }

    /// Integrates the blocks requested by `sl` (single layer kernel) and
    /// `dl_k` (double layer wavenumber) over the pair `(a, b)`.
    fn pair(&self, mesh: &CurveMesh, a: usize, b: usize, sl: Option<Kernel>, dl_k: Option<f64>) -> PairBlocks {
        match Self::touch(mesh, a, b) {
            Touch::Same => self.same_segment(mesh, a, sl),
            Touch::TestEndTrialStart => self.adjacent(mesh, a, b, true, sl, dl_k),
            Touch::TestStartTrialEnd => self.adjacent(mesh, a, b, false, sl, dl_k),
            Touch::None => self.regular(mesh, a, b, sl, dl_k),
        }
    }

    fn regular(&self, mesh: &CurveMesh, a: usize, b: usize, sl: Option<Kernel>, dl_k: Option<f64>) -> PairBlocks {
        let (la, lb) = (mesh.segment_lengths[a], mesh.segment_lengths[b]);
        let dist = (mesh.point_on_segment(a, 0.5) - mesh.point_on_segment(b, 0.5)).norm();
        let rule = if dist > self.far_ratio * la.max(lb) { &self.far } else { &self.near };
        let (na, nb) = (mesh.normals[a], mesh.normals[b]);
        let mut out = PairBlocks::default();
        for (x, wx) in rule.iter() {
            let ra = mesh.point_on_segment(a, x);
            for (y, wy) in rule.iter() {
                let rb = mesh.point_on_segment(b, y);
                let diff = rb - ra;
                let d = diff.norm();
                let w = wx * wy * la * lb;
                let basis = [[hat(0, x) * hat(0, y), hat(0, x) * hat(1, y)], [hat(1, x) * hat(0, y), hat(1, x) * hat(1, y)]];
                if let Some(kernel) = sl {
                    let g = kernel.value(d) * w;
                    for p in 0..2 {
                        for q in 0..2 {
                            out.single[p][q] += g * basis[p][q];
                        }
                    }
                }
                if let Some(k) = dl_k {
                    let h = h1_unchecked(k * d);
                    let c = Complex64::new(0.25 * k * h.im, -0.25 * k * h.re) * (w / d);
                    let kd = c * nb.dot(diff);
                    let kd_t = c * (-na.dot(diff));
                    for p in 0..2 {
                        for q in 0..2 {
                            out.double[p][q] += kd * basis[p][q];
                            out.double_t[p][q] += kd_t * basis[p][q];
                        }
                    }
                }
            }
        }
        out
    }

    fn same_segment(&self, mesh: &CurveMesh, a: usize, sl: Option<Kernel>) -> PairBlocks {
        // Both double-layer blocks vanish: n·(r' − r) = 0 on a straight segment.
        let mut out = PairBlocks::default();
        let Some(kernel) = sl else { return out };
        let l = mesh.segment_lengths[a];
        // F_pq(w) = (1 − w)·∫₀¹ [ψ_p(y + w)ψ_q(y) + ψ_p(y)ψ_q(y + w)] dz,  y = (1 − w)z
        let f = |p: usize, q: usize, w: f64| -> f64 {
            (1.0 - w)
                * self
                    .near
                    .iter()
                    .map(|(z, wz)| {
                        let y = (1.0 - w) * z;
                        wz * (hat(p, y + w) * hat(q, y) + hat(p, y) * hat(q, y + w))
                    })
                    .sum::<f64>()
        };
        let ln_l = l.ln();
        for p in 0..2 {
            for q in 0..2 {
                // −ln(l w)/(2π) = −ln(l)/(2π) + (−ln w)/(2π)
                let plain: f64 = self.near.iter().map(|(w, ww)| ww * f(p, q, w)).sum();
                let logpart: f64 = self.log.iter().map(|(w, ww)| ww * f(p, q, w)).sum();
                let mut acc = Complex64::new(INV_2PI * (logpart - ln_l * plain), 0.0);
                for (w, ww) in self.near.iter() {
                    acc += kernel.remainder(l * w) * (ww * f(p, q, w));
                }
                out.single[p][q] = acc * (l * l);
            }
        }
        out
    }

    /// Segments `a` (test) and `b` (trial) sharing one vertex. With
    /// `test_end_at_vertex` the shared vertex is the end of `a` and the start
    /// of `b`; otherwise the start of `a` and the end of `b`.
    fn adjacent(
        &self,
        mesh: &CurveMesh,
        a: usize,
        b: usize,
        test_end_at_vertex: bool,
        sl: Option<Kernel>,
        dl_k: Option<f64>,
    ) -> PairBlocks {
        let (la, lb) = (mesh.segment_lengths[a], mesh.segment_lengths[b]);
        let (ta, tb) = (mesh.tangents[a], mesh.tangents[b]);
        let (na, nb) = (mesh.normals[a], mesh.normals[b]);
        // Unit directions from the shared vertex into each segment.
        let (dir_a, dir_b) = if test_end_at_vertex { (-ta, tb) } else { (ta, -tb) };
        let cos = dir_a.dot(dir_b);
        // Local hat coordinates from distances to the vertex (unit scaled).
        let xa = |u: f64| if test_end_at_vertex { 1.0 - u } else { u };
        let xb = |u: f64| if test_end_at_vertex { u } else { 1.0 - u };

        let mut out = PairBlocks::default();
        // Two Duffy triangles: (u_a, u_b) = (ρ, ρv) and (ρv, ρ).
        for tri in 0..2 {
            let coords = |rho: f64, v: f64| if tri == 0 { (rho, rho * v) } else { (rho * v, rho) };
            // d = ρ·√Q(v)
            let q_of = |v: f64| {
                let (ua, ub) = if tri == 0 { (1.0, v) } else { (v, 1.0) };
                la * la * ua * ua + lb * lb * ub * ub - 2.0 * la * lb * ua * ub * cos
            };
            let basis = |rho: f64, v: f64| {
                let (ua, ub) = coords(rho, v);
                let (x, y) = (xa(ua), xb(ub));
                [[hat(0, x) * hat(0, y), hat(0, x) * hat(1, y)], [hat(1, x) * hat(0, y), hat(1, x) * hat(1, y)]]
            };
            for (v, wv) in self.near.iter() {
                let qv = q_of(v);
                let sq = qv.sqrt();
                if let Some(kernel) = sl {
                    // −ln ρ/(2π) with the log rule in ρ.
                    for (rho, wr) in self.log.iter() {
                        let bs = basis(rho, v);
                        let c = INV_2PI * wv * wr * rho * la * lb;
                        for p in 0..2 {
                            for q in 0..2 {
                                out.single[p][q] += c * bs[p][q];
                            }
                        }
                    }
                    // −ln Q(v)/(4π) plus the smooth remainder.
                    for (rho, wr) in self.near.iter() {
                        let bs = basis(rho, v);
                        let g = kernel.remainder(rho * sq) - Complex64::new(0.5 * INV_2PI * qv.ln(), 0.0);
                        let c = g * (wv * wr * rho * la * lb);
                        for p in 0..2 {
                            for q in 0..2 {
                                out.single[p][q] += c * bs[p][q];
                            }
                        }
                    }
                }
                if let Some(k) = dl_k {
                    for (rho, wr) in self.near.iter() {
                        let (ua, ub) = coords(rho, v);
                        let ra = dir_a * (ua * la);
                        let rb = dir_b * (ub * lb);
                        let diff = rb - ra;
                        let d = rho * sq;
                        let bs = basis(rho, v);
                        let w = wv * wr * rho * la * lb;
                        let kd = dl_kernel(k, d, nb.dot(diff)) * w;
                        let kd_t = dl_kernel(k, d, -na.dot(diff)) * w;
                        for p in 0..2 {
                            for q in 0..2 {
                                out.double[p][q] += kd * bs[p][q];
                                out.double_t[p][q] += kd_t * bs[p][q];
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Operator matrices from one pass over the segment pairs.
#[derive(Debug, Clone)]
pub struct Operators {
    pub single_layer: Option<ComplexMatrix>,
    pub hypersingular: Option<ComplexMatrix>,
    pub double_layer: Option<ComplexMatrix>,
}

/// Which operators [`assemble_operators`] should produce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorRequest {
    /// Kernel of the single layer, if wanted.
    pub single_layer: Option<Kernel>,
    pub hypersingular: bool,
    pub double_layer: bool,
}

/// Assembles the requested operators at wavenumber `k`. The hypersingular
/// operator always uses the Helmholtz kernel; when the requested single
/// layer is also Helmholtz at `k` the kernel integrals are shared.
pub fn assemble_operators(mesh: &CurveMesh, k: f64, req: OperatorRequest, quad: &QuadratureConfig) -> Result<Operators> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::invalid(format!("wavenumber must be positive, got {k}")));
    }
    let integrator = PairIntegrator::new(quad)?;
    let n = mesh.len();
    let helmholtz = Kernel::Helmholtz { k };
    let shared = req.single_layer == Some(helmholtz);

    // Pair kernels needed in the main pass.
    let main_sl = if req.hypersingular { Some(helmholtz) } else { req.single_layer };
    let dl_k = req.double_layer.then_some(k);

    let mut s = (req.single_layer.is_some()).then(|| Mat::<Complex64>::zeros(n, n));
    let mut hs = req.hypersingular.then(|| Mat::<Complex64>::zeros(n, n));
    let mut dl = req.double_layer.then(|| Mat::<Complex64>::zeros(n, n));
    // A single layer at a different kernel than the hypersingular one needs its own pass.
    let extra_sl = if req.hypersingular && !shared { req.single_layer } else { None };

    for a in 0..n {
        let (a0, a1) = mesh.segment_nodes(a);
        let ia = [a0, a1];
        let da = [-1.0 / mesh.segment_lengths[a], 1.0 / mesh.segment_lengths[a]];
        for b in a..n {
            let (b0, b1) = mesh.segment_nodes(b);
            let ib = [b0, b1];
            let blocks = integrator.pair(mesh, a, b, main_sl, dl_k);

            if let Some(hs) = hs.as_mut() {
                let db = [-1.0 / mesh.segment_lengths[b], 1.0 / mesh.segment_lengths[b]];
                let total: Complex64 = blocks.single.iter().flatten().sum();
                let nn = mesh.normals[a].dot(mesh.normals[b]);
                for p in 0..2 {
                    for q in 0..2 {
                        let v = total * (da[p] * db[q]) - blocks.single[p][q] * (k * k * nn);
                        hs[(ia[p], ib[q])] += v;
                        if a != b {
                            hs[(ib[q], ia[p])] += v;
                        }
                    }
                }
            }
            let sl_blocks = match extra_sl {
                Some(kernel) => Some(integrator.pair(mesh, a, b, Some(kernel), None).single),
                None if req.single_layer.is_some() => Some(blocks.single),
                None => None,
            };
            if let (Some(s), Some(block)) = (s.as_mut(), sl_blocks) {
                for p in 0..2 {
                    for q in 0..2 {
                        s[(ia[p], ib[q])] += block[p][q];
                        if a != b {
                            s[(ib[q], ia[p])] += block[p][q];
                        }
                    }
                }
            }
            if let Some(dl) = dl.as_mut() {
                for p in 0..2 {
                    for q in 0..2 {
                        dl[(ia[p], ib[q])] += blocks.double[p][q];
                        if a != b {
                            dl[(ib[q], ia[p])] += blocks.double_t[p][q];
                        }
                    }
                }
            }
        }
    }

    Ok(Operators {
        single_layer: s.map(|m| ComplexMatrix::new(m, true)).transpose()?,
        hypersingular: hs.map(|m| ComplexMatrix::new(m, true)).transpose()?,
        double_layer: dl.map(ComplexMatrix::general),
    })
}

/// `[S]_ij = ⟨φ_i, S φ_j⟩` with the Helmholtz kernel.
pub fn assemble_single_layer(mesh: &CurveMesh, k: f64, quad: &QuadratureConfig) -> Result<ComplexMatrix> {
    assemble_single_layer_with(mesh, Kernel::Helmholtz { k }, quad)
}

/// Single layer with an arbitrary [`Kernel`].
pub fn assemble_single_layer_with(mesh: &CurveMesh, kernel: Kernel, quad: &QuadratureConfig) -> Result<ComplexMatrix> {
    let k = match kernel {
        Kernel::Helmholtz { k } | Kernel::Yukawa { k } => k,
    };
    let req = OperatorRequest { single_layer: Some(kernel), hypersingular: false, double_layer: false };
    Ok(assemble_operators(mesh, k, req, quad)?.single_layer.expect("requested"))
}

/// `[D]_ij = ⟨φ_i, D φ_j⟩`.
pub fn assemble_double_layer(mesh: &CurveMesh, k: f64, quad: &QuadratureConfig) -> Result<ComplexMatrix> {
    let req = OperatorRequest { single_layer: None, hypersingular: false, double_layer: true };
    Ok(assemble_operators(mesh, k, req, quad)?.double_layer.expect("requested"))
}

/// `[N]_ij = ⟨φ_i, N φ_j⟩` via the integration-by-parts form.
pub fn assemble_hypersingular(mesh: &CurveMesh, k: f64, quad: &QuadratureConfig) -> Result<ComplexMatrix> {
    let req = OperatorRequest { single_layer: None, hypersingular: true, double_layer: false };
    Ok(assemble_operators(mesh, k, req, quad)?.hypersingular.expect("requested"))
}

/// Exact mass matrix `[G]_ij = ⟨φ_i, φ_j⟩`.
pub fn assemble_gram(mesh: &CurveMesh) -> RealSymMatrix {
    let n = mesh.len();
    let mut g = Mat::<f64>::zeros(n, n);
    for seg in 0..n {
        let (i, j) = mesh.segment_nodes(seg);
        let l = mesh.segment_lengths[seg];
        g[(i, i)] += l / 3.0;
        g[(j, j)] += l / 3.0;
        g[(i, j)] += l / 6.0;
        g[(j, i)] += l / 6.0;
    }
    RealSymMatrix::new(g).expect("gram is symmetric by construction")
}

/// Variational Laplacian `[L]_ij = ⟨φ_i', φ_j'⟩` with arclength derivatives.
pub fn assemble_laplacian(mesh: &CurveMesh) -> RealSymMatrix {
    let n = mesh.len();
    let mut m = Mat::<f64>::zeros(n, n);
    for seg in 0..n {
        let (i, j) = mesh.segment_nodes(seg);
        let inv = 1.0 / mesh.segment_lengths[seg];
        m[(i, i)] += inv;
        m[(j, j)] += inv;
        m[(i, j)] -= inv;
        m[(j, i)] -= inv;
    }
    RealSymMatrix::new(m).expect("laplacian is symmetric by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh2d::ParametricCurve;

    fn circle(n: usize) -> CurveMesh {
        CurveMesh::build(ParametricCurve::circle(1.0), n).unwrap()
    }

    #[test]
    fn gram_stencil_on_uniform_mesh() {
        let m = circle(16);
        let g = assemble_gram(&m);
        let h = m.h;
        for i in 0..16 {
            assert!((g.mat()[(i, i)] - 2.0 * h / 3.0).abs() < 1e-15);
            assert!((g.mat()[(i, (i + 1) % 16)] - h / 6.0).abs() < 1e-15);
            assert!((g.mat()[(i, (i + 15) % 16)] - h / 6.0).abs() < 1e-15);
            assert_eq!(g.mat()[(i, (i + 5) % 16)], 0.0);
        }
    }

    #[test]
    fn gram_row_sums_are_nodal_weights() {
        let m = CurveMesh::build(ParametricCurve::Ellipse { a: 1.42, b: 1.32 }, 40).unwrap();
        let g = assemble_gram(&m);
        for i in 0..40 {
            let row: f64 = (0..40).map(|j| g.mat()[(i, j)]).sum();
            let prev = m.segment_lengths[(i + 39) % 40];
            let want = 0.5 * (prev + m.segment_lengths[i]);
            assert!((row - want).abs() < 1e-15);
        }
        let ev = g.eigenvalues().unwrap();
        assert!(ev[0] > 0.0);
        assert!(ev[39] / ev[0] <= 10.0);
    }

    #[test]
    fn laplacian_stencil_and_nullspace() {
        let m = circle(12);
        let l = assemble_laplacian(&m);
        let h = m.h;
        assert!((l.mat()[(3, 3)] - 2.0 / h).abs() < 1e-12);
        assert!((l.mat()[(3, 4)] + 1.0 / h).abs() < 1e-12);
        let norm = l.mat().norm_max();
        for i in 0..12 {
            let row: f64 = (0..12).map(|j| l.mat()[(i, j)]).sum();
            assert!(row.abs() <= 1e-13 * norm);
        }
        let ev = l.eigenvalues().unwrap();
        let tol = 1e-10 * ev[11];
        assert_eq!(ev.iter().filter(|&&e| e.abs() > tol).count(), 11);
    }

    #[test]
    fn rejects_low_quadrature_order() {
        let m = circle(16);
        let cfg = QuadratureConfig { order: 1, ..Default::default() };
        assert!(assemble_single_layer(&m, 1.0, &cfg).is_err());
        assert!(assemble_single_layer(&m, 0.0, &QuadratureConfig::default()).is_err());
    }

    #[test]
    fn self_pair_matches_closed_form_at_small_k() {
        // ∬ ln|x − y| ψ_p(x)ψ_q(y) over the unit square is −7/16 for p = q and
        // −5/16 otherwise; every ∬ ψ_p ψ_q equals 1/4. For k → 0 the remainder
        // tends to the constant (i/4) − (ln(k/2) + γ)/(2π).
        let m = circle(64);
        let integ = PairIntegrator::new(&QuadratureConfig::default()).unwrap();
        let l = m.segment_lengths[0];
        let k = 1e-6;
        let blocks = integ.same_segment(&m, 0, Some(Kernel::Helmholtz { k }));
        let konst = Complex64::new(-INV_2PI * ((0.5 * k).ln() + crate::special::EULER_GAMMA), 0.25);
        for p in 0..2 {
            for q in 0..2 {
                let c = if p == q { -7.0 / 16.0 } else { -5.0 / 16.0 };
                let log_part = -INV_2PI * (0.25 * l.ln() + c) * l * l;
                let want = Complex64::new(log_part, 0.0) + konst * (0.25 * l * l);
                assert!((blocks.single[p][q] - want).norm() < 1e-12 * want.norm(), "{p}{q}");
            }
        }
    }

    /// `Σ_j A_0j e^{imθ_j}`: the eigenvalue of a circulant matrix on mode `m`.
    fn circulant_symbol(a: faer::MatRef<'_, Complex64>, m: i32) -> Complex64 {
        let n = a.nrows();
        (0..n)
            .map(|j| a[(0, j)] * Complex64::from_polar(1.0, m as f64 * std::f64::consts::TAU * j as f64 / n as f64))
            .sum()
    }

    fn gram_symbol(mesh: &CurveMesh, m: i32) -> f64 {
        let theta = m as f64 * std::f64::consts::TAU / mesh.len() as f64;
        mesh.h * (2.0 / 3.0 + theta.cos() / 3.0)
    }

    fn hankel(m: i32, x: f64) -> Complex64 {
        Complex64::new(libm::jn(m, x), libm::yn(m, x))
    }

    fn hankel_prime(m: i32, x: f64) -> Complex64 {
        (hankel(m - 1, x) - hankel(m + 1, x)) * 0.5
    }

    fn bessel_j_prime(m: i32, x: f64) -> f64 {
        0.5 * (libm::jn(m - 1, x) - libm::jn(m + 1, x))
    }

    #[test]
    fn circle_symbols_match_analytic_series() {
        let (k, r) = (0.4, 1.0);
        let mesh = circle(256);
        let quad = QuadratureConfig::default();
        let req = OperatorRequest { single_layer: Some(Kernel::Helmholtz { k }), hypersingular: true, double_layer: true };
        let ops = assemble_operators(&mesh, k, req, &quad).unwrap();
        let (s, n, d) = (ops.single_layer.unwrap(), ops.hypersingular.unwrap(), ops.double_layer.unwrap());
        let i_half_pi = Complex64::new(0.0, 0.5 * PI);
        for m in 0..=8 {
            let g = gram_symbol(&mesh, m);
            let s_want = i_half_pi * r * libm::jn(m, k * r) * hankel(m, k * r);
            let d_want = Complex64::new(0.5, 0.0) + i_half_pi * (k * r) * libm::jn(m, k * r) * hankel_prime(m, k * r);
            let n_want = -i_half_pi * (k * k * r) * bessel_j_prime(m, k * r) * hankel_prime(m, k * r);
            let s_got = circulant_symbol(s.mat(), m) / g;
            let d_got = circulant_symbol(d.mat(), m) / g;
            let n_got = circulant_symbol(n.mat(), m) / g;
            assert!((s_got - s_want).norm() <= 1e-3 * s_want.norm(), "S m={m}: {s_got} vs {s_want}");
            assert!((d_got - d_want).norm() <= 1e-3, "D m={m}: {d_got} vs {d_want}");
            assert!((n_got - n_want).norm() <= 1e-3 * n_want.norm().max(1.0), "N m={m}: {n_got} vs {n_want}");
        }
        assert!(s.symmetry_defect() <= 1e-12);
        assert!(n.symmetry_defect() <= 1e-12);
    }

    #[test]
    fn laplace_limit_double_layer_on_constants() {
        let mesh = circle(128);
        let d = assemble_double_layer(&mesh, 1e-4, &QuadratureConfig::default()).unwrap();
        let g = gram_symbol(&mesh, 0);
        let zero_mode = circulant_symbol(d.mat(), 0) / g;
        assert!((zero_mode - Complex64::new(-0.5, 0.0)).norm() < 5e-3, "{zero_mode}");
        for m in [5, 20, 40] {
            assert!((circulant_symbol(d.mat(), m) / gram_symbol(&mesh, m)).norm() < 5e-3);
        }
    }

    #[test]
    fn hypersingular_nearly_annihilates_constants_at_small_k() {
        let mesh = CurveMesh::build(ParametricCurve::Ellipse { a: 1.42, b: 1.32 }, 96).unwrap();
        let n = assemble_hypersingular(&mesh, 1e-4, &QuadratureConfig::default()).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); 96];
        let y = crate::dense::matvec(n.mat(), &ones);
        let opnorm = n.mat().norm_l2();
        assert!(crate::dense::norm2(&y) <= 1e-2 * opnorm * crate::dense::norm2(&ones));
    }

    #[test]
    fn doubling_quadrature_order_converges() {
        let mesh = CurveMesh::build(ParametricCurve::PerturbedCircle { r0: 2.0, amp: 0.2, lobes: 8 }, 64).unwrap();
        let k = 0.4;
        let req = OperatorRequest { single_layer: Some(Kernel::Helmholtz { k }), hypersingular: true, double_layer: true };
        let base = QuadratureConfig::default();
        let a = assemble_operators(&mesh, k, req, &base).unwrap();
        let b = assemble_operators(&mesh, k, req, &base.doubled()).unwrap();
        let pairs = [
            (a.single_layer.unwrap(), b.single_layer.unwrap(), 1e-10),
            (a.hypersingular.unwrap(), b.hypersingular.unwrap(), 1e-10),
            (a.double_layer.unwrap(), b.double_layer.unwrap(), 1e-8),
        ];
        for (x, y, tol) in pairs {
            let mut worst: f64 = 0.0;
            for i in 0..64 {
                for j in 0..64 {
                    // Pairs touching at most through a shared basis support are skipped.
                    let gap = (i as isize - j as isize).rem_euclid(64).min((j as isize - i as isize).rem_euclid(64));
                    if gap <= 2 {
                        continue;
                    }
                    let (u, v) = (x.mat()[(i, j)], y.mat()[(i, j)]);
                    worst = worst.max((u - v).norm() / v.norm());
                }
            }
            assert!(worst <= tol, "worst relative change {worst:e}");
        }
    }

    #[test]
    fn yukawa_single_layer_is_real_symmetric_positive() {
        let mesh = circle(64);
        let s = assemble_single_layer_with(&mesh, Kernel::Yukawa { k: 0.4 }, &QuadratureConfig::default()).unwrap();
        assert!(s.mat().col(3).iter().all(|z| z.im == 0.0));
        let re = Mat::from_fn(64, 64, |i, j| s.mat()[(i, j)].re);
        let ev = RealSymMatrix::new(re).unwrap().eigenvalues().unwrap();
        assert!(ev[0] > 0.0);
    }
}
