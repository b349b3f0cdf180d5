//! CSV tables and metadata sidecars.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use opfilter::qh3d::Weighting;

use crate::config::ExperimentConfig;
use crate::experiments::{Qh3dRow, RowStatus, SpectraRun};

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Float(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.replace([',', '\n', '\r'], ";"),
        }
    }
}

/// Comma-separated text with a header row and LF line endings.
pub fn render_csv(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(Cell::render).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub const SPECTRA_HEADER: &[&str] = &["mode_index", "proj_C", "proj_Cfiltered", "proj_UV", "proj_rhs", "kept_flag"];
pub const REFINE_HEADER: &[&str] =
    &["N", "inv_h", "rel_error_vs_dense", "skeleton_rank", "factorize_ms", "apply_ms", "compress_ms", "status"];
pub const TABLE_HEADER: &[&str] = &["N", "rel_error", "dense_bytes", "skeleton_bytes", "rank", "status"];
pub const QH3D_HEADER: &[&str] = &[
    "mesh",
    "weighting",
    "vertices",
    "edges",
    "triangles",
    "genus",
    "loop_star_orthogonal",
    "partition_defect",
    "harmonic_rank",
    "projector_defect",
    "full_filter_defect",
    "status",
];

pub fn spectra_rows(run: &SpectraRun) -> Vec<Vec<Cell>> {
    (0..run.proj_c.len())
        .map(|j| {
            vec![
                Cell::Int(j),
                Cell::Float(run.proj_c[j]),
                Cell::Float(run.proj_c_filtered[j]),
                Cell::Float(run.proj_uv[j]),
                Cell::Float(run.proj_rhs[j]),
                Cell::Int(usize::from(run.kept[j])),
            ]
        })
        .collect()
}

pub fn refine_rows(rows: &[RowStatus]) -> Vec<Vec<Cell>> {
    rows.iter()
        .map(|row| {
            let mut cells = vec![Cell::Int(row.n())];
            match row.run() {
                Some(r) => cells.extend([
                    Cell::Float(r.inv_h),
                    Cell::Float(r.rel_error),
                    Cell::Int(r.rank),
                    Cell::Float(r.factorize_ms),
                    Cell::Float(r.apply_ms),
                    Cell::Float(r.compress_ms),
                ]),
                None => cells.extend((0..6).map(|_| Cell::Text(String::new()))),
            }
            cells.push(Cell::Text(row.status()));
            cells
        })
        .collect()
}

pub fn table_rows(rows: &[RowStatus]) -> Vec<Vec<Cell>> {
    rows.iter()
        .map(|row| {
            let mut cells = vec![Cell::Int(row.n())];
            match row.run() {
                Some(r) => cells.extend([
                    Cell::Float(r.rel_error),
                    Cell::Int(r.dense_bytes),
                    Cell::Int(r.skeleton_bytes),
                    Cell::Int(r.rank),
                ]),
                None => cells.extend((0..4).map(|_| Cell::Text(String::new()))),
            }
            cells.push(Cell::Text(row.status()));
            cells
        })
        .collect()
}

pub fn qh3d_rows(rows: &[Qh3dRow]) -> Vec<Vec<Cell>> {
    rows.iter()
        .map(|r| {
            let weighting = match r.weighting {
                Weighting::Plain => "plain",
                Weighting::Orthonormalized => "orthonormalized",
            };
            vec![
                Cell::Text(r.check.name.clone()),
                Cell::Text(weighting.into()),
                Cell::Int(r.vertices),
                Cell::Int(r.edges),
                Cell::Int(r.triangles),
                Cell::Int(r.check.genus),
                Cell::Int(usize::from(r.check.loop_star_orthogonal)),
                Cell::Float(r.check.partition_defect),
                Cell::Int(r.check.harmonic_rank),
                Cell::Float(r.check.projector_defect),
                Cell::Float(r.check.full_filter_defect),
                Cell::Text(if r.pass { "pass" } else { "fail" }.into()),
            ]
        })
        .collect()
}

/// Metadata sidecar: enough to rerun the seeded paths identically.
pub fn metadata(cfg: &ExperimentConfig, extra: &[(&str, String)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# opfilter experiment metadata");
    let _ = writeln!(s, "# experiment = {}", cfg.experiment.name());
    let _ = writeln!(s, "# library_version = {}", env!("CARGO_PKG_VERSION"));
    for (k, v) in extra {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s.push_str(&cfg.echo());
    s
}

/// Writes `<out>/<name>.csv` and `<out>/<name>.meta`; returns the CSV path.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    header: &[&str],
    rows: &[Vec<Cell>],
    extra: &[(&str, String)],
) -> io::Result<PathBuf> {
    let dir: &Path = &cfg.out;
    std::fs::create_dir_all(dir)?;
    let name = cfg.experiment.name();
    let csv = dir.join(format!("{name}.csv"));
    std::fs::write(&csv, render_csv(header, rows))?;
    std::fs::write(dir.join(format!("{name}.meta")), metadata(cfg, extra))?;
    Ok(csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_with_seventeen_digits() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, f64::MIN_POSITIVE, 0.0] {
            let s = Cell::Float(x).render();
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(Cell::Float(0.25).render(), "2.5000000000000000e-1");
    }

    #[test]
    fn csv_layout() {
        let s = render_csv(&["a", "b"], &[vec![Cell::Int(1), Cell::Text("x,y".into())]]);
        assert_eq!(s, "a,b\n1,x;y\n");
        assert!(!s.contains('\r'));
    }
}
