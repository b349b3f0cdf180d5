//! The three 2D experiments and the 3D projector check.

use std::time::Instant;

use faer::Mat;
use opfilter::calderon2d::{Formulation, NormalizedOperators};
use opfilter::compression::{lowrank_factor, LowRankFactor};
use opfilter::dense::{mul_rc, rel_diff};
use opfilter::excitation2d::Source2D;
use opfilter::mesh2d::CurveMesh;
use opfilter::qh3d::{builtin_meshes, check_projectors, ProjectorCheck, Weighting};
use opfilter::solver::{dense_solve, memory_report, WoodburyInverse};
use opfilter::assembly2d::ScatteringParams;
use opfilter::Complex64;

use crate::config::ExperimentConfig;

/// Outcome of the compressed pipeline on one mesh size.
#[derive(Debug, Clone)]
pub struct SizeRun {
    pub n: usize,
    pub inv_h: f64,
    pub rel_error: f64,
    pub rank: usize,
    /// Estimated relative spectral error of the skeleton.
    pub achieved_error: f64,
    pub compress_ms: f64,
    pub factorize_ms: f64,
    pub apply_ms: f64,
    pub dense_bytes: usize,
    pub skeleton_bytes: usize,
}

/// A per-size result: either a run or the reason it was not produced.
#[derive(Debug, Clone)]
pub enum RowStatus {
    Ok(SizeRun),
    Skipped { n: usize, reason: String },
    Failed { n: usize, reason: String },
}

impl RowStatus {
    pub fn n(&self) -> usize {
        match self {
            RowStatus::Ok(r) => r.n,
            RowStatus::Skipped { n, .. } | RowStatus::Failed { n, .. } => *n,
        }
    }

    pub fn run(&self) -> Option<&SizeRun> {
        match self {
            RowStatus::Ok(r) => Some(r),
            _ => None,
        }
    }

    pub fn status(&self) -> String {
        match self {
            RowStatus::Ok(_) => "ok".into(),
            RowStatus::Skipped { reason, .. } => format!("skipped: {reason}"),
            RowStatus::Failed { reason, .. } => format!("failed: {reason}"),
        }
    }
}

fn millis_min<T>(reps: usize, mut f: impl FnMut() -> T) -> (T, f64) {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..reps.max(1) {
        let t = Instant::now();
        let v = f();
        best = best.min(t.elapsed().as_secs_f64() * 1e3);
        out = Some(v);
    }
    (out.expect("at least one repetition"), best)
}

fn setup(cfg: &ExperimentConfig, n: usize) -> opfilter::Result<(NormalizedOperators, Source2D)> {
    let mesh = CurveMesh::build(cfg.geometry.curve(), n)?;
    let params = ScatteringParams::new(cfg.k, cfg.eta)?;
    let src = cfg.source.source()?;
    let ops = NormalizedOperators::build(&mesh, params, Some(&src), cfg.formulation, cfg.calderon_options())?;
    Ok((ops, src))
}

/// Dense solve of the unfiltered, uncompressed normalized system.
pub fn reference_solution(ops: &NormalizedOperators, formulation: Formulation) -> opfilter::Result<Vec<Complex64>> {
    let sys = ops.unfiltered_system(formulation)?;
    let a = sys.dense_matrix();
    drop(sys);
    dense_solve(&a, &ops.rhs(formulation)?)
}

/// Filter, compress, factorize and solve on an `n`-node mesh, comparing
/// with [`reference_solution`].
pub fn run_size(cfg: &ExperimentConfig, n: usize) -> opfilter::Result<SizeRun> {
    let (ops, _) = setup(cfg, n)?;
    let f = cfg.formulation;
    let reference = reference_solution(&ops, f)?;
    let filter = ops.laplacian_filter(cfg.filter_n)?;
    let sys = ops.filtered_system(f, &filter)?;
    let inv_h = 1.0 / ops.mesh.h;
    drop(filter);
    drop(ops);

    let t = Instant::now();
    let skel = lowrank_factor(sys.compact.mat(), cfg.epsilon, cfg.seed)?;
    let compress_ms = t.elapsed().as_secs_f64() * 1e3;
    let (inv, factorize_ms) = millis_min(cfg.reps, || WoodburyInverse::factorize(sys.beta, &skel));
    let inv = inv?;
    let (x, apply_ms) = millis_min(cfg.reps, || inv.apply(&sys.rhs));
    let x = x?;
    let mem = memory_report(n, skel.rank());
    Ok(SizeRun {
        n,
        inv_h,
        rel_error: rel_diff(&x, &reference),
        rank: skel.rank(),
        achieved_error: skel.achieved_error,
        compress_ms,
        factorize_ms,
        apply_ms,
        dense_bytes: mem.dense_bytes,
        skeleton_bytes: mem.skeleton_bytes,
    })
}

/// [`run_size`] over every configured size, honouring `max_n`.
pub fn run_sizes(cfg: &ExperimentConfig, mut progress: impl FnMut(&RowStatus)) -> Vec<RowStatus> {
    cfg.sizes
        .iter()
        .map(|&n| {
            let row = if n > cfg.max_n {
                RowStatus::Skipped { n, reason: format!("N exceeds max_n {}", cfg.max_n) }
            } else {
                match run_size(cfg, n) {
                    Ok(r) => RowStatus::Ok(r),
                    Err(e) => RowStatus::Failed { n, reason: e.to_string() },
                }
            };
            progress(&row);
            row
        })
        .collect()
}

/// Per-mode magnitudes on the ascending Laplacian eigenbasis `V`.
#[derive(Debug, Clone)]
pub struct SpectraRun {
    pub filter_n: usize,
    pub rank: usize,
    /// Row norms of `VᵀC·V` for the unfiltered compact part.
    pub proj_c: Vec<f64>,
    /// Same for the filtered compact part `P·C`.
    pub proj_c_filtered: Vec<f64>,
    /// Same for the skeleton `U·Vᵀ`.
    pub proj_uv: Vec<f64>,
    /// `|Vᵀ·v|` for the right-hand side.
    pub proj_rhs: Vec<f64>,
    /// Whether singular-value index `j` is retained by the skeleton.
    pub kept: Vec<bool>,
}

/// Row norms of `Vᵀ·M`; right-multiplying by the orthogonal `V` keeps them.
fn projected_row_norms(v: &Mat<f64>, m: &Mat<Complex64>) -> Vec<f64> {
    let p = mul_rc(v.transpose(), m.as_ref());
    (0..p.nrows()).map(|i| (0..p.ncols()).map(|j| p[(i, j)].norm_sqr()).sum::<f64>().sqrt()).collect()
}

pub fn run_spectra(cfg: &ExperimentConfig) -> opfilter::Result<SpectraRun> {
    let n = cfg.sizes[0];
    if n > cfg.max_n {
        return Err(opfilter::Error::InvalidInput(format!("N = {n} exceeds max_n {}", cfg.max_n)));
    }
    let (ops, _) = setup(cfg, n)?;
    let f = cfg.formulation;
    let filter = ops.laplacian_filter(cfg.filter_n)?;
    let v = filter.modes_ascending();
    let c = ops.compact(f)?;
    let proj_c = projected_row_norms(&v, &c);
    let filtered = filter.apply_left(c.as_ref())?;
    drop(c);
    let proj_c_filtered = projected_row_norms(&v, &filtered);
    let skel: LowRankFactor = lowrank_factor(filtered.as_ref(), cfg.epsilon, cfg.seed)?;
    let proj_uv = projected_row_norms(&v, &skel.to_dense());
    let rhs = ops.rhs(f)?;
    let rhs_m = Mat::from_fn(n, 1, |i, _| rhs[i]);
    let proj_rhs = projected_row_norms(&v, &rhs_m);
    let kept = (0..n).map(|j| j < skel.rank()).collect();
    Ok(SpectraRun { filter_n: filter.n(), rank: skel.rank(), proj_c, proj_c_filtered, proj_uv, proj_rhs, kept })
}

/// One projector-suite row and its verdict.
#[derive(Debug, Clone)]
pub struct Qh3dRow {
    pub check: ProjectorCheck,
    pub weighting: Weighting,
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub pass: bool,
}

pub const QH3D_TOL: f64 = 1e-10;

pub fn run_qh3d_check() -> opfilter::Result<Vec<Qh3dRow>> {
    let mut rows = Vec::new();
    for (name, mesh) in builtin_meshes() {
        for weighting in [Weighting::Plain, Weighting::Orthonormalized] {
            let check = check_projectors(name, &mesh, weighting)?;
            let pass = check.loop_star_orthogonal
                && check.partition_defect <= QH3D_TOL
                && check.projector_defect <= QH3D_TOL
                && check.full_filter_defect <= QH3D_TOL
                && check.harmonic_rank == 2 * check.genus;
            rows.push(Qh3dRow {
                check,
                weighting,
                vertices: mesh.vertices.len(),
                edges: mesh.num_edges(),
                triangles: mesh.triangles.len(),
                pass,
            });
        }
    }
    Ok(rows)
}
