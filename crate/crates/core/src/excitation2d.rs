//! Incident TE fields and their Galerkin moments.
//!
//! Time dependence is `exp(−iωt)`, matching the outgoing kernel
//! `(i/4)·H₀⁽¹⁾`. The transverse-electric pair is `H = h_z ẑ` and
//! `E = (iη/k)·∇h_z × ẑ`, so that `ẑ·∇×E = iωμ·h_z` and the tangential
//! trace is `e_t = (iη/k)·(∇h_z × ẑ)·t̂ = −(iη/k)·∂h_z/∂n`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::mesh2d::CurveMesh;
use crate::quadrature::GaussLegendre;
use crate::special::{h0_unchecked, h1_unchecked};

/// Gauss order per segment for right-hand-side moments.
pub const RHS_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceKind {
    /// `h_z = amplitude·(i/4)·H₀⁽¹⁾(k|r − position|)`.
    MagneticLineSource { position: Vec2 },
    /// `h_z = amplitude·exp(ik d̂·r)`.
    PlaneWaveTe { direction: Vec2 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source2D {
    pub kind: SourceKind,
    pub amplitude: Complex64,
}

impl Source2D {
    /// Unit line source at `position`.
    pub fn line_source(position: Vec2) -> Self {
        Self { kind: SourceKind::MagneticLineSource { position }, amplitude: Complex64::new(1.0, 0.0) }
    }

    /// Unit plane wave travelling along `direction` (normalized here).
    pub fn plane_wave(direction: Vec2) -> Result<Self> {
        let norm = direction.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("plane-wave direction must be a nonzero vector"));
        }
        Ok(Self {
            kind: SourceKind::PlaneWaveTe { direction: direction * (1.0 / norm) },
            amplitude: Complex64::new(1.0, 0.0),
        })
    }

    /// `(h_z, ∇h_z)` at `r`.
    fn field_and_gradient(&self, k: f64, r: Vec2) -> Result<(Complex64, [Complex64; 2])> {
        match self.kind {
            SourceKind::MagneticLineSource { position } => {
                let diff = r - position;
                let d = diff.norm();
                if !(d > 0.0) {
                    return Err(Error::invalid("field evaluated at the line-source position"));
                }
                let i4 = Complex64::new(0.0, 0.25) * self.amplitude;
                let h = i4 * h0_unchecked(k * d);
                // d/dd H₀(kd) = −k·H₁(kd)
                let radial = -i4 * h1_unchecked(k * d) * (k / d);
                Ok((h, [radial * diff.x, radial * diff.y]))
            }
            SourceKind::PlaneWaveTe { direction } => {
                let phase = Complex64::new(0.0, k * direction.dot(r)).exp();
                let h = self.amplitude * phase;
                let ik = Complex64::new(0.0, k);
                Ok((h, [ik * direction.x * h, ik * direction.y * h]))
            }
        }
    }
}

fn check_medium(k: f64, eta: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite() && eta > 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!("need k > 0 and eta > 0, got k={k}, eta={eta}")));
    }
    Ok(())
}

/// `(e_t, h_z)` at point `r` for tangent `t̂`.
pub fn incident_fields(src: &Source2D, k: f64, eta: f64, r: Vec2, tangent: Vec2) -> Result<(Complex64, Complex64)> {
    check_medium(k, eta)?;
    let (h, grad) = src.field_and_gradient(k, r)?;
    // (∇h × ẑ)·t̂ = ∂_y h·t_x − ∂_x h·t_y
    let curl_t = grad[1] * tangent.x - grad[0] * tangent.y;
    Ok((Complex64::new(0.0, eta / k) * curl_t, h))
}

/// In-plane electric field `E = (iη/k)·∇h_z × ẑ` at `r`.
pub fn incident_electric_field(src: &Source2D, k: f64, eta: f64, r: Vec2) -> Result<[Complex64; 2]> {
    check_medium(k, eta)?;
    let (_, grad) = src.field_and_gradient(k, r)?;
    let c = Complex64::new(0.0, eta / k);
    Ok([c * grad[1], -c * grad[0]])
}

/// Distance from `p` to the polygon.
pub fn distance_to_mesh(mesh: &CurveMesh, p: Vec2) -> f64 {
    (0..mesh.len())
        .map(|seg| {
            let a = mesh.nodes[seg];
            let t = mesh.tangents[seg];
            let x = (p - a).dot(t).clamp(0.0, mesh.segment_lengths[seg]);
            (p - (a + t * x)).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Galerkin moments `e₂_i = ⟨φ_i, e_t⟩` and `h₂_i = ⟨φ_i, h_z⟩`.
pub fn assemble_rhs(mesh: &CurveMesh, src: &Source2D, k: f64, eta: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    assemble_rhs_with_order(mesh, src, k, eta, RHS_ORDER)
}

pub fn assemble_rhs_with_order(
    mesh: &CurveMesh,
    src: &Source2D,
    k: f64,
    eta: f64,
    order: usize,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    check_medium(k, eta)?;
    if let SourceKind::MagneticLineSource { position } = src.kind {
        let d = distance_to_mesh(mesh, position);
        if d < 0.5 * mesh.h {
            return Err(Error::invalid(format!(
                "line source at distance {d:e} from the boundary; must be at least h/2 = {:e}",
                0.5 * mesh.h
            )));
        }
    }
    let rule = GaussLegendre::new(order)?;
    let n = mesh.len();
    let mut e2 = vec![Complex64::new(0.0, 0.0); n];
    let mut h2 = vec![Complex64::new(0.0, 0.0); n];
    for seg in 0..n {
        let (i, j) = mesh.segment_nodes(seg);
        let l = mesh.segment_lengths[seg];
        let t = mesh.tangents[seg];
        for (x, w) in rule.iter() {
            let (e, h) = incident_fields(src, k, eta, mesh.point_on_segment(seg, x), t)?;
            let (wi, wj) = (w * l * (1.0 - x), w * l * x);
            e2[i] += e * wi;
            e2[j] += e * wj;
            h2[i] += h * wi;
            h2[j] += h * wj;
        }
    }
    Ok((e2, h2))
}
