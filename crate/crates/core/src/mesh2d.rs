//! Closed planar curves and their polygonal discretizations.
//!
//! Nodes are sampled uniformly in the curve parameter `θ`. Segment `i`
//! joins node `i` to node `i + 1 (mod N)`, so a mesh has as many segments as
//! nodes. The piecewise-linear hat function `φ_i` equals one at node `i` and
//! is supported on segments `i − 1` and `i`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Smallest admissible number of nodes.
pub const MIN_NODES: usize = 8;

/// A smooth, counterclockwise, 2π-periodic closed curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParametricCurve {
    /// `(a cos θ, b sin θ)`.
    Ellipse { a: f64, b: f64 },
    /// Polar curve `r(θ) = r0 + amp·sin(lobes·θ)`.
    PerturbedCircle { r0: f64, amp: f64, lobes: u32 },
}

impl ParametricCurve {
    pub fn circle(radius: f64) -> Self {
        ParametricCurve::Ellipse { a: radius, b: radius }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ParametricCurve::Ellipse { a, b } => {
                if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                    return Err(Error::invalid(format!("ellipse axes must be positive, got a={a}, b={b}")));
                }
            }
            ParametricCurve::PerturbedCircle { r0, amp, .. } => {
                if !(r0 > 0.0 && r0.is_finite()) {
                    return Err(Error::invalid(format!("perturbed circle needs r0 > 0, got {r0}")));
                }
                if !(amp.abs() < r0) {
                    return Err(Error::invalid(format!(
                        "perturbed circle needs |amp| < r0, got amp={amp}, r0={r0}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn position(&self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        match *self {
            ParametricCurve::Ellipse { a, b } => Vec2::new(a * c, b * s),
            ParametricCurve::PerturbedCircle { r0, amp, lobes } => {
                let r = r0 + amp * (lobes as f64 * theta).sin();
                Vec2::new(r * c, r * s)
            }
        }
    }

    /// `position(t0 + step) − position(t0)`. For ellipses this uses the
    /// product form of the chord, so equal steps on a circle give equal
    /// lengths to the last bit.
    pub fn chord(&self, t0: f64, step: f64) -> Vec2 {
        match *self {
            ParametricCurve::Ellipse { a, b } => {
                let half = 0.5 * step;
                let (sm, cm) = (t0 + half).sin_cos();
                let scale = 2.0 * half.sin();
                Vec2::new(-a * sm * scale, b * cm * scale)
            }
            ParametricCurve::PerturbedCircle { .. } => self.position(t0 + step) - self.position(t0),
        }
    }

    /// `d position / dθ`.
    pub fn derivative(&self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        match *self {
            ParametricCurve::Ellipse { a, b } => Vec2::new(-a * s, b * c),
            ParametricCurve::PerturbedCircle { r0, amp, lobes } => {
                let m = lobes as f64;
                let r = r0 + amp * (m * theta).sin();
                let dr = amp * m * (m * theta).cos();
                Vec2::new(dr * c - r * s, dr * s + r * c)
            }
        }
    }
}

/// Polygonal discretization of a [`ParametricCurve`].
#[derive(Debug, Clone)]
pub struct CurveMesh {
    pub curve: ParametricCurve,
    pub nodes: Vec<Vec2>,
    pub node_params: Vec<f64>,
    pub segment_lengths: Vec<f64>,
    /// Unit tangent of each segment.
    pub tangents: Vec<Vec2>,
    /// Outward unit normal of each segment (tangent rotated by −π/2).
    pub normals: Vec<Vec2>,
    /// Arclength from node 0 to node `i` along the polygon.
    pub arc_offsets: Vec<f64>,
    /// Mean segment length.
    pub h: f64,
}

impl CurveMesh {
    /// Samples `n_nodes` points at `θ_i = 2πi/n_nodes`.
    pub fn build(curve: ParametricCurve, n_nodes: usize) -> Result<Self> {
        curve.validate()?;
        if n_nodes < MIN_NODES {
            return Err(Error::invalid(format!(
                "a closed curve mesh needs at least {MIN_NODES} nodes, got {n_nodes}"
            )));
        }
        let node_params: Vec<f64> = (0..n_nodes).map(|i| TAU * i as f64 / n_nodes as f64).collect();
        let nodes: Vec<Vec2> = node_params.iter().map(|&t| curve.position(t)).collect();

        let mut segment_lengths = Vec::with_capacity(n_nodes);
        let mut tangents = Vec::with_capacity(n_nodes);
        for i in 0..n_nodes {
            let d = curve.chord(node_params[i], TAU / n_nodes as f64);
            let len = d.norm();
            if !(len > 0.0) {
                return Err(Error::InvalidMesh(format!("segment {i} has zero length")));
            }
            segment_lengths.push(len);
            tangents.push(d * (1.0 / len));
        }
        let normals = tangents.iter().map(|t| t.rot_cw()).collect();

        let mut arc_offsets = Vec::with_capacity(n_nodes);
        let mut acc = 0.0;
        for len in &segment_lengths {
            arc_offsets.push(acc);
            acc += len;
        }
        let h = acc / n_nodes as f64;

        let mesh = Self { curve, nodes, node_params, segment_lengths, tangents, normals, arc_offsets, h };
        let turning = mesh.total_turning();
        if (turning - TAU).abs() > 1e-8 {
            return Err(Error::InvalidMesh(format!(
                "total turning angle {turning} is not 2π; curve is not a simple counterclockwise loop"
            )));
        }
        Ok(mesh)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        self.segment_lengths.iter().sum()
    }

    /// Sum of signed exterior angles between consecutive segments.
    pub fn total_turning(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let a = self.tangents[i];
                let b = self.tangents[(i + 1) % n];
                a.cross(b).atan2(a.dot(b))
            })
            .sum()
    }

    /// Endpoints `(node i, node i+1)` of segment `i`, as node indices.
    pub fn segment_nodes(&self, seg: usize) -> (usize, usize) {
        (seg, (seg + 1) % self.len())
    }

    /// Point at local coordinate `x ∈ [0, 1]` on segment `seg`.
    pub fn point_on_segment(&self, seg: usize, x: f64) -> Vec2 {
        self.nodes[seg] + self.tangents[seg] * (x * self.segment_lengths[seg])
    }

    /// True when all segment lengths agree to `rel_tol`.
    pub fn is_uniform(&self, rel_tol: f64) -> bool {
        let (lo, hi) = self
            .segment_lengths
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &l| (lo.min(l), hi.max(l)));
        hi - lo <= rel_tol * hi
    }

    /// Segment index and local coordinate of polygon arclength `s` (taken modulo the perimeter).
    pub fn locate(&self, s: f64) -> (usize, f64) {
        let p = self.perimeter();
        let s = s.rem_euclid(p);
        let seg = match self.arc_offsets.binary_search_by(|o| o.partial_cmp(&s).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let x = ((s - self.arc_offsets[seg]) / self.segment_lengths[seg]).clamp(0.0, 1.0);
        (seg, x)
    }

    /// Hat function `φ_i` at polygon arclength `s`.
    pub fn basis_eval(&self, i: usize, s: f64) -> Result<f64> {
        let n = self.len();
        if i >= n {
            return Err(Error::OutOfRange { index: i, len: n });
        }
        let (seg, x) = self.locate(s);
        let (a, b) = self.segment_nodes(seg);
        let mut v = 0.0;
        if a == i {
            v += 1.0 - x;
        }
        if b == i {
            v += x;
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_chord_length() {
        for n in [8, 16, 100, 1004] {
            let m = CurveMesh::build(ParametricCurve::circle(1.0), n).unwrap();
            let chord = 2.0 * (std::f64::consts::PI / n as f64).sin();
            assert!((m.h - chord).abs() < 1e-15);
            assert!(m.is_uniform(1e-14));
        }
    }

    #[test]
    fn rejects_small_meshes_and_bad_curves() {
        assert!(CurveMesh::build(ParametricCurve::circle(1.0), 4).is_err());
        assert!(CurveMesh::build(ParametricCurve::circle(1.0), 7).is_err());
        let bad = ParametricCurve::PerturbedCircle { r0: 1.0, amp: 1.0, lobes: 3 };
        assert!(CurveMesh::build(bad, 64).is_err());
        assert!(CurveMesh::build(ParametricCurve::Ellipse { a: -1.0, b: 1.0 }, 64).is_err());
    }

    #[test]
    fn normals_point_outward() {
        let m = CurveMesh::build(ParametricCurve::Ellipse { a: 1.42, b: 1.32 }, 64).unwrap();
        for i in 0..m.len() {
            let mid = m.point_on_segment(i, 0.5);
            assert!(m.normals[i].dot(mid) > 0.0);
            assert!((m.normals[i].dot(m.tangents[i])).abs() < 1e-15);
        }
        assert!((m.total_turning() - TAU).abs() < 1e-12);
    }

    #[test]
    fn refinement_halves_h() {
        let c = ParametricCurve::PerturbedCircle { r0: 2.0, amp: 0.2, lobes: 8 };
        for n in [64, 251, 1004] {
            let a = CurveMesh::build(c, n).unwrap();
            let b = CurveMesh::build(c, 2 * n).unwrap();
            let ratio = b.h / a.h;
            assert!((0.49..=0.51).contains(&ratio), "n={n}: ratio {ratio}");
        }
    }

    #[test]
    fn hat_function_interpolates() {
        let m = CurveMesh::build(ParametricCurve::Ellipse { a: 1.42, b: 1.32 }, 32).unwrap();
        for i in 0..m.len() {
            for j in 0..m.len() {
                let v = m.basis_eval(i, m.arc_offsets[j]).unwrap();
                assert_eq!(v, if i == j { 1.0 } else { 0.0 });
            }
            let mid = m.arc_offsets[i] + 0.5 * m.segment_lengths[i];
            assert!((m.basis_eval(i, mid).unwrap() - 0.5).abs() < 1e-14);
            let prev = (i + m.len() - 1) % m.len();
            let mid_prev = m.arc_offsets[prev] + 0.5 * m.segment_lengths[prev];
            assert!((m.basis_eval(i, mid_prev).unwrap() - 0.5).abs() < 1e-14);
        }
        assert!(m.basis_eval(32, 0.0).is_err());
    }

    #[test]
    fn perimeter_wraps() {
        let m = CurveMesh::build(ParametricCurve::circle(1.0), 16).unwrap();
        let (seg, x) = m.locate(m.perimeter() + 0.25 * m.segment_lengths[0]);
        assert_eq!(seg, 0);
        assert!((x - 0.25).abs() < 1e-12);
    }
}
