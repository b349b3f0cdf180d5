//! Quasi-Helmholtz projectors on closed triangle meshes.
//!
//! Edges are oriented from the lower to the higher vertex index,
//! `v⁻ → v⁺`. The RWG function of an edge flows out of `c⁺`, the triangle
//! that traverses `v⁻ → v⁺` in its counterclockwise (outward-normal)
//! order, into `c⁻`. Then
//!
//! * `Σ_ij = +1` if triangle `j` is `c_i⁺`, `−1` if it is `c_i⁻` (star);
//! * `Λ_ij = +1` if vertex `j` is `v_i⁺`, `−1` if it is `v_i⁻` (loop);
//!
//! and `ΛᵀΣ = 0` identically. Projectors `P^A = A·(AᵀA)⁺·Aᵀ` split the RWG
//! coefficient space into star, loop and harmonic (dimension `2g`) parts.
//! The filtered variants keep only the `n` smallest singular values of the
//! graph Laplacian `AᵀA` before pseudo-inverting.

use std::collections::HashMap;
use std::path::Path;

use faer::Mat;

use crate::dense::{mul_rr, RealSymMatrix};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::spectral::{filtered_pseudo_inverse, sym_sqrt_and_invsqrt, symmetrized, ZERO_TOL};

/// Closed, consistently oriented, connected triangle mesh.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    /// `[v⁻, v⁺]` with `v⁻ < v⁺`.
    pub edges: Vec<[usize; 2]>,
    /// `[c⁺, c⁻]` per edge.
    pub edge_triangles: Vec<[usize; 2]>,
    pub genus: usize,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh has no triangles".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a vertex")));
            }
        }
        let areas: Vec<f64> = triangles.iter().map(|t| triangle_area(&vertices, t)).collect();
        let max_area = areas.iter().cloned().fold(0.0, f64::max);
        if let Some(t) = areas.iter().position(|&a| !(a >= 1e-14 * max_area) || a == 0.0) {
            return Err(Error::InvalidMesh(format!("triangle {t} is degenerate")));
        }

        // Directed half-edges: each must appear once, its reverse once.
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if directed.insert((a, b), t).is_some() {
                    return Err(Error::InvalidMesh(format!(
                        "directed edge {a}->{b} used twice: non-manifold or inconsistently oriented"
                    )));
                }
            }
        }
        let mut edges = Vec::new();
        let mut edge_triangles = Vec::new();
        let mut keys: Vec<(usize, usize)> = directed.keys().copied().filter(|&(a, b)| a < b).collect();
        keys.sort_unstable();
        for &(a, b) in &keys {
            let plus = directed[&(a, b)];
            let Some(&minus) = directed.get(&(b, a)) else {
                return Err(Error::InvalidMesh(format!("edge {a}-{b} is on a boundary or inconsistently oriented")));
            };
            edges.push([a, b]);
            edge_triangles.push([plus, minus]);
        }
        if directed.keys().any(|&(a, b)| a > b && !directed.contains_key(&(b, a))) {
            return Err(Error::InvalidMesh("mesh is not closed".into()));
        }

        let used: Vec<bool> = {
            let mut u = vec![false; nv];
            triangles.iter().flatten().for_each(|&v| u[v] = true);
            u
        };
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(Error::InvalidMesh(format!("vertex {v} belongs to no triangle")));
        }
        if components(nv, &edges) != 1 {
            return Err(Error::InvalidMesh("mesh is not connected".into()));
        }
        let chi = nv as i64 - edges.len() as i64 + triangles.len() as i64;
        if chi > 2 || (2 - chi) % 2 != 0 {
            return Err(Error::InvalidMesh(format!("Euler characteristic {chi} is not that of a closed orientable surface")));
        }
        let genus = ((2 - chi) / 2) as usize;
        Ok(Self { vertices, triangles, edges, edge_triangles, genus })
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn area(&self, t: usize) -> f64 {
        triangle_area(&self.vertices, &self.triangles[t])
    }

    /// Enclosed volume by the divergence theorem; positive for outward orientation.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i]);
                a.dot(b.cross(c)) / 6.0
            })
            .sum()
    }

    /// Regular tetrahedron inscribed in the unit sphere.
    pub fn tetrahedron() -> Self {
        let s = 1.0 / 3f64.sqrt();
        let v = vec![Vec3::new(s, s, s), Vec3::new(s, -s, -s), Vec3::new(-s, s, -s), Vec3::new(-s, -s, s)];
        let t = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        Self::new(v, t).expect("tetrahedron is valid")
    }

    pub fn octahedron() -> Self {
        let v = vec![
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 0.0, -1.0),
        ];
        let t = vec![[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]];
        Self::new(v, t).expect("octahedron is valid")
    }

    /// Icosahedron with each triangle split into four `subdivisions` times,
    /// vertices projected to the unit sphere.
    pub fn icosphere(subdivisions: usize) -> Self {
        let p = (1.0 + 5f64.sqrt()) / 2.0;
        let mut v: Vec<Vec3> = [
            (-1.0, p, 0.0),
            (1.0, p, 0.0),
            (-1.0, -p, 0.0),
            (1.0, -p, 0.0),
            (0.0, -1.0, p),
            (0.0, 1.0, p),
            (0.0, -1.0, -p),
            (0.0, 1.0, -p),
            (p, 0.0, -1.0),
            (p, 0.0, 1.0),
            (-p, 0.0, -1.0),
            (-p, 0.0, 1.0),
        ]
        .iter()
        .map(|&(x, y, z)| Vec3::new(x, y, z).normalized())
        .collect();
        let mut t: Vec<[usize; 3]> = vec![
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
            let mut midpoint = |a: usize, b: usize, v: &mut Vec<Vec3>| {
                *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    v.push(((v[a] + v[b]) * 0.5).normalized());
                    v.len() - 1
                })
            };
            let mut next = Vec::with_capacity(4 * t.len());
            for &[a, b, c] in &t {
                let ab = midpoint(a, b, &mut v);
                let bc = midpoint(b, c, &mut v);
                let ca = midpoint(c, a, &mut v);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            t = next;
        }
        Self::new(v, t).expect("icosphere is valid")
    }

    /// Structured torus with `n_major × n_minor` quads split into triangles.
    pub fn torus(major: f64, minor: f64, n_major: usize, n_minor: usize) -> Result<Self> {
        if !(major > minor && minor > 0.0) || n_major < 3 || n_minor < 3 {
            return Err(Error::invalid("torus needs major > minor > 0 and at least 3 divisions each way"));
        }
        let tau = std::f64::consts::TAU;
        let mut v = Vec::with_capacity(n_major * n_minor);
        for i in 0..n_major {
            let u = tau * i as f64 / n_major as f64;
            for j in 0..n_minor {
                let w = tau * j as f64 / n_minor as f64;
                let r = major + minor * w.cos();
                v.push(Vec3::new(r * u.cos(), r * u.sin(), minor * w.sin()));
            }
        }
        let id = |i: usize, j: usize| (i % n_major) * n_minor + (j % n_minor);
        let mut t = Vec::with_capacity(2 * n_major * n_minor);
        for i in 0..n_major {
            for j in 0..n_minor {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                t.push([a, b, c]);
                t.push([a, c, d]);
            }
        }
        Self::new(v, t)
    }

    /// Parses an ASCII OFF file with triangular faces.
    pub fn parse_off(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
        let mut rest_of_header = header.strip_prefix("OFF").ok_or(Error::Parse { line, msg: "missing OFF header".into() })?.trim().to_string();
        let counts_line = if rest_of_header.is_empty() {
            let (l, c) = lines.next().ok_or(Error::Parse { line, msg: "missing counts".into() })?;
            rest_of_header = c.to_string();
            l
        } else {
            line
        };
        let counts: Vec<usize> = parse_fields(&rest_of_header, counts_line)?;
        if counts.len() < 2 {
            return Err(Error::Parse { line: counts_line, msg: "counts line needs vertex and face counts".into() });
        }
        let (nv, nf) = (counts[0], counts[1]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (l, s) = lines.next().ok_or(Error::Parse { line: counts_line, msg: "file ends inside vertex list".into() })?;
            let xyz: Vec<f64> = parse_fields(s, l)?;
            if xyz.len() < 3 {
                return Err(Error::Parse { line: l, msg: "vertex needs three coordinates".into() });
            }
            vertices.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (l, s) = lines.next().ok_or(Error::Parse { line: counts_line, msg: "file ends inside face list".into() })?;
            let f: Vec<usize> = parse_fields(s, l)?;
            if f.first() != Some(&3) || f.len() < 4 {
                return Err(Error::Parse { line: l, msg: "only triangular faces are supported".into() });
            }
            triangles.push([f[1], f[2], f[3]]);
        }
        Self::new(vertices, triangles)
    }

    pub fn read_off(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_off(&std::fs::read_to_string(path)?)
    }

    pub fn to_off(&self) -> String {
        let mut s = format!("OFF\n{} {} {}\n", self.vertices.len(), self.triangles.len(), self.edges.len());
        for v in &self.vertices {
            s.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", v.x, v.y, v.z));
        }
        for t in &self.triangles {
            s.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
        }
        s
    }
}

fn parse_fields<T: std::str::FromStr>(s: &str, line: usize) -> Result<Vec<T>> {
    s.split_whitespace()
        .map(|f| f.parse().map_err(|_| Error::Parse { line, msg: format!("cannot parse {f:?}") }))
        .collect()
}

fn triangle_area(v: &[Vec3], t: &[usize; 3]) -> f64 {
    0.5 * (v[t[1]] - v[t[0]]).cross(v[t[2]] - v[t[0]]).norm()
}

fn components(nv: usize, edges: &[[usize; 2]]) -> usize {
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &[a, b] in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    (0..nv).filter(|&v| find(&mut parent, v) == v).count()
}

/// Signed incidence matrices.
#[derive(Debug, Clone)]
pub struct IncidenceMatrices {
    /// Edge × triangle.
    pub sigma: Mat<f64>,
    /// Edge × vertex.
    pub lambda: Mat<f64>,
}

pub fn build_incidence(mesh: &TriangleMesh) -> IncidenceMatrices {
    let ne = mesh.num_edges();
    let mut sigma = Mat::<f64>::zeros(ne, mesh.triangles.len());
    let mut lambda = Mat::<f64>::zeros(ne, mesh.vertices.len());
    for (i, (&[vm, vp], &[cp, cm])) in mesh.edges.iter().zip(&mesh.edge_triangles).enumerate() {
        sigma[(i, cp)] = 1.0;
        sigma[(i, cm)] = -1.0;
        lambda[(i, vp)] = 1.0;
        lambda[(i, vm)] = -1.0;
    }
    IncidenceMatrices { sigma, lambda }
}

impl IncidenceMatrices {
    /// `ΛᵀΣ = 0` in integer arithmetic.
    pub fn loop_star_orthogonal(&self) -> bool {
        let (ne, nv, nt) = (self.lambda.nrows(), self.lambda.ncols(), self.sigma.ncols());
        let lam: Vec<Vec<(usize, i64)>> = (0..ne)
            .map(|i| (0..nv).filter(|&j| self.lambda[(i, j)] != 0.0).map(|j| (j, self.lambda[(i, j)] as i64)).collect())
            .collect();
        let sig: Vec<Vec<(usize, i64)>> = (0..ne)
            .map(|i| (0..nt).filter(|&j| self.sigma[(i, j)] != 0.0).map(|j| (j, self.sigma[(i, j)] as i64)).collect())
            .collect();
        let mut acc: HashMap<(usize, usize), i64> = HashMap::new();
        for i in 0..ne {
            for &(v, a) in &lam[i] {
                for &(t, b) in &sig[i] {
                    *acc.entry((v, t)).or_insert(0) += a * b;
                }
            }
        }
        acc.values().all(|&x| x == 0)
    }
}

/// Gram matrices of the RWG, patch and pyramid spaces.
#[derive(Debug, Clone)]
pub struct Grams {
    pub g_ff: RealSymMatrix,
    pub g_pp: RealSymMatrix,
    pub g_ll: RealSymMatrix,
}

/// `∫_T (r − p)·(r − q) dA`.
fn rwg_moment(a: [Vec3; 3], area: f64, p: Vec3, q: Vec3) -> f64 {
    let s = a[0] + a[1] + a[2];
    let sq = a.iter().map(|v| v.dot(*v)).sum::<f64>();
    let c = s * (1.0 / 3.0);
    area * ((s.dot(s) + sq) / 12.0 - c.dot(p + q) + p.dot(q))
}

pub fn build_grams(mesh: &TriangleMesh) -> Result<Grams> {
    let (ne, nt, nv) = (mesh.num_edges(), mesh.triangles.len(), mesh.vertices.len());
    // Edges of each triangle with RWG sign and opposite vertex.
    let mut tri_edges: Vec<Vec<(usize, f64, usize)>> = vec![Vec::new(); nt];
    for (i, (&[vm, vp], &[cp, cm])) in mesh.edges.iter().zip(&mesh.edge_triangles).enumerate() {
        for (t, sign) in [(cp, 1.0), (cm, -1.0)] {
            let free = *mesh.triangles[t].iter().find(|&&v| v != vm && v != vp).expect("triangle has a free vertex");
            tri_edges[t].push((i, sign, free));
        }
    }
    let mut g_ff = Mat::<f64>::zeros(ne, ne);
    let mut g_pp = Mat::<f64>::zeros(nt, nt);
    let mut g_ll = Mat::<f64>::zeros(nv, nv);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.area(t);
        let pts = tri.map(|v| mesh.vertices[v]);
        g_pp[(t, t)] = area;
        for a in 0..3 {
            for b in 0..3 {
                g_ll[(tri[a], tri[b])] += area / 12.0 * if a == b { 2.0 } else { 1.0 };
            }
        }
        for &(i, si, pi) in &tri_edges[t] {
            let li = edge_length(mesh, i);
            for &(j, sj, pj) in &tri_edges[t] {
                let lj = edge_length(mesh, j);
                let m = rwg_moment(pts, area, mesh.vertices[pi], mesh.vertices[pj]);
                g_ff[(i, j)] += si * sj * li * lj / (4.0 * area * area) * m;
            }
        }
    }
    Ok(Grams {
        g_ff: RealSymMatrix::new(symmetrized(g_ff))?,
        g_pp: RealSymMatrix::new(g_pp)?,
        g_ll: RealSymMatrix::new(symmetrized(g_ll))?,
    })
}

fn edge_length(mesh: &TriangleMesh, i: usize) -> f64 {
    let [a, b] = mesh.edges[i];
    (mesh.vertices[a] - mesh.vertices[b]).norm()
}

/// Gram-weighted `Σ̃ = G_ff^{-1/2}·Σ·G_pp^{1/2}` and `Λ̃ = G_ff^{1/2}·Λ·G_λλ^{-1/2}`.
pub fn orthonormalized(inc: &IncidenceMatrices, grams: &Grams) -> Result<IncidenceMatrices> {
    let (ff_sqrt, ff_inv) = sym_sqrt_and_invsqrt(&grams.g_ff)?;
    let (pp_sqrt, _) = sym_sqrt_and_invsqrt(&grams.g_pp)?;
    let (_, ll_inv) = sym_sqrt_and_invsqrt(&grams.g_ll)?;
    let sigma = mul_rr(mul_rr(ff_inv.mat(), inc.sigma.as_ref()).as_ref(), pp_sqrt.mat());
    let lambda = mul_rr(mul_rr(ff_sqrt.mat(), inc.lambda.as_ref()).as_ref(), ll_inv.mat());
    Ok(IncidenceMatrices { sigma, lambda })
}

/// Which incidence matrices the projectors are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    Plain,
    /// Gram-orthonormalized `Σ̃`, `Λ̃`.
    Orthonormalized,
}

/// `A·[(AᵀA)_n]⁺·Aᵀ`.
fn range_projector(a: &Mat<f64>, n: usize) -> Result<Mat<f64>> {
    let ata = RealSymMatrix::new(symmetrized(mul_rr(a.transpose(), a.as_ref())))?;
    let pinv = filtered_pseudo_inverse(&ata, n)?;
    Ok(symmetrized(mul_rr(mul_rr(a.as_ref(), pinv.as_ref()).as_ref(), a.transpose())))
}

/// Unfiltered quasi-Helmholtz projectors.
#[derive(Debug, Clone)]
pub struct Projectors {
    pub p_sigma: Mat<f64>,
    pub p_lambda: Mat<f64>,
    pub p_harmonic: Mat<f64>,
}

pub fn projectors(inc: &IncidenceMatrices) -> Result<Projectors> {
    let p_sigma = range_projector(&inc.sigma, inc.sigma.ncols())?;
    let p_lambda = range_projector(&inc.lambda, inc.lambda.ncols())?;
    let n = p_sigma.nrows();
    let p_harmonic = Mat::from_fn(n, n, |i, j| f64::from(u8::from(i == j)) - p_sigma[(i, j)] - p_lambda[(i, j)]);
    Ok(Projectors { p_sigma, p_lambda, p_harmonic })
}

/// Primal `(P^Σ_n, P^{ΛH}_n)` and dual `(P^Λ_n, P^{ΣH}_n)` filters.
#[derive(Debug, Clone)]
pub struct FilteredProjectors {
    pub p_sigma_n: Mat<f64>,
    pub p_lambda_h_n: Mat<f64>,
    pub dual_p_lambda_n: Mat<f64>,
    pub dual_p_sigma_h_n: Mat<f64>,
}

pub fn filtered_projectors(inc: &IncidenceMatrices, n_sigma: usize, n_lambda: usize) -> Result<FilteredProjectors> {
    let (ns, nl) = (inc.sigma.ncols(), inc.lambda.ncols());
    if n_sigma > ns {
        return Err(Error::OutOfRange { index: n_sigma, len: ns + 1 });
    }
    if n_lambda > nl {
        return Err(Error::OutOfRange { index: n_lambda, len: nl + 1 });
    }
    let full = projectors(inc)?;
    let p_sigma_n = range_projector(&inc.sigma, n_sigma)?;
    let p_lambda_n = range_projector(&inc.lambda, n_lambda)?;
    // The complement I − P^Σ − P^Λ = P^H is shared by both harmonic terms.
    let p_lambda_h_n = &p_lambda_n + &full.p_harmonic;
    let dual_p_sigma_h_n = &p_sigma_n + &full.p_harmonic;
    Ok(FilteredProjectors { p_sigma_n, p_lambda_h_n, dual_p_lambda_n: p_lambda_n, dual_p_sigma_h_n })
}

/// Rank by eigenvalue count above `ZERO_TOL·max|λ|`.
pub fn numerical_rank(x: &Mat<f64>) -> Result<usize> {
    let ev = RealSymMatrix::new(symmetrized(x.clone()))?.eigenvalues()?;
    let max = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(ev.iter().filter(|v| v.abs() > ZERO_TOL * max).count())
}

/// Rank of a symmetric projector: eigenvalues above one half.
pub fn projector_rank(p: &Mat<f64>) -> Result<usize> {
    let ev = RealSymMatrix::new(symmetrized(p.clone()))?.eigenvalues()?;
    Ok(ev.iter().filter(|v| **v > 0.5).count())
}

/// Results of the projector invariant suite on one mesh.
#[derive(Debug, Clone)]
pub struct ProjectorCheck {
    pub name: String,
    pub genus: usize,
    pub loop_star_orthogonal: bool,
    /// `‖P^Σ + P^Λ + P^H − I‖_max` (zero by construction; reported for completeness).
    pub partition_defect: f64,
    pub harmonic_rank: usize,
    /// Largest of `‖P² − P‖_max` over `P^Σ, P^Λ`, and `‖P^Σ·P^Λ‖_max`.
    pub projector_defect: f64,
    /// Largest deviation of the full-index filters from their unfiltered forms.
    pub full_filter_defect: f64,
}

/// Runs the invariant suite on `mesh` with the given weighting.
pub fn check_projectors(name: &str, mesh: &TriangleMesh, weighting: Weighting) -> Result<ProjectorCheck> {
    let plain = build_incidence(mesh);
    let inc = match weighting {
        Weighting::Plain => plain.clone(),
        Weighting::Orthonormalized => orthonormalized(&plain, &build_grams(mesh)?)?,
    };
    let p = projectors(&inc)?;
    let n = p.p_sigma.nrows();
    let sum = &(&p.p_sigma + &p.p_lambda) + &p.p_harmonic;
    let partition_defect = (&sum - Mat::<f64>::identity(n, n)).norm_max();
    let idem = |m: &Mat<f64>| (&mul_rr(m.as_ref(), m.as_ref()) - m).norm_max();
    let projector_defect = idem(&p.p_sigma)
        .max(idem(&p.p_lambda))
        .max(mul_rr(p.p_sigma.as_ref(), p.p_lambda.as_ref()).norm_max());
    let f = filtered_projectors(&inc, inc.sigma.ncols(), inc.lambda.ncols())?;
    let full_filter_defect = (&f.p_sigma_n - &p.p_sigma)
        .norm_max()
        .max((&f.dual_p_lambda_n - &p.p_lambda).norm_max())
        .max((&f.p_lambda_h_n - (&p.p_lambda + &p.p_harmonic)).norm_max())
        .max((&f.dual_p_sigma_h_n - (&p.p_sigma + &p.p_harmonic)).norm_max());
    Ok(ProjectorCheck {
        name: name.to_string(),
        genus: mesh.genus,
        loop_star_orthogonal: plain.loop_star_orthogonal(),
        partition_defect,
        harmonic_rank: projector_rank(&p.p_harmonic)?,
        projector_defect,
        full_filter_defect,
    })
}

/// The built-in meshes used by [`check_projectors`] suites.
pub fn builtin_meshes() -> Vec<(&'static str, TriangleMesh)> {
    vec![
        ("tetrahedron", TriangleMesh::tetrahedron()),
        ("octahedron", TriangleMesh::octahedron()),
        ("icosphere", TriangleMesh::icosphere(1)),
        ("torus", TriangleMesh::torus(1.0, 0.4, 12, 8).expect("valid torus")),
    ]
}
