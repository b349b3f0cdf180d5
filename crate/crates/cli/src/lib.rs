//! Experiment driver for `opfilter`: spectra projections, a refinement
//! sweep, the memory/error table and the 3D projector check, written as
//! CSV with a metadata sidecar.

pub mod config;
pub mod experiments;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Experiment, ExperimentConfig};
use experiments::{run_qh3d_check, run_sizes, run_spectra, RowStatus};
use output::{qh3d_rows, refine_rows, spectra_rows, table_rows, write_outputs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<opfilter::Error> for CliError {
    fn from(e: opfilter::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "opfilter", version, about = "Laplacian-filtered Calderon experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-mode projections of the compact part, its filtered and compressed forms, and the RHS.
    Spectra(Flags),
    /// Error and skeleton rank against mesh refinement.
    Refine(Flags),
    /// Memory and error table on the perturbed circle.
    Table(Flags),
    /// Quasi-Helmholtz projector invariants on the built-in 3D meshes.
    Qh3dCheck(Flags),
}

/// Flags shared by all subcommands; each overrides the same key in `--config`.
#[derive(Debug, Args, Default)]
pub struct Flags {
    /// `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub max_n: Option<String>,
    /// efie, mfie or cfie.
    #[arg(long)]
    pub formulation: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub filter_n: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub eta: Option<String>,
    /// circle:R, ellipse:A,B or perturbed:R0,AMP,LOBES.
    #[arg(long)]
    pub geometry: Option<String>,
    /// line:X,Y or plane:DX,DY.
    #[arg(long)]
    pub source: Option<String>,
    /// Comma-separated node counts.
    #[arg(long)]
    pub sizes: Option<String>,
    /// helmholtz or yukawa.
    #[arg(long)]
    pub preconditioner: Option<String>,
    /// minus or plus.
    #[arg(long)]
    pub mfie_sign: Option<String>,
    /// Timing repetitions (minimum reported).
    #[arg(long)]
    pub reps: Option<String>,
}

impl Flags {
    fn overrides(&self) -> Vec<(String, String)> {
        let pairs = [
            ("out", &self.out),
            ("seed", &self.seed),
            ("max_n", &self.max_n),
            ("formulation", &self.formulation),
            ("alpha", &self.alpha),
            ("filter_n", &self.filter_n),
            ("epsilon", &self.epsilon),
            ("k", &self.k),
            ("eta", &self.eta),
            ("geometry", &self.geometry),
            ("source", &self.source),
            ("sizes", &self.sizes),
            ("preconditioner", &self.preconditioner),
            ("mfie_sign", &self.mfie_sign),
            ("reps", &self.reps),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v))).collect()
    }
}

/// Runs a parsed command, writing progress to stderr; returns the CSV path.
pub fn execute(command: &Command) -> Result<PathBuf, CliError> {
    let (experiment, flags) = match command {
        Command::Spectra(f) => (Experiment::Spectra, f),
        Command::Refine(f) => (Experiment::Refine, f),
        Command::Table(f) => (Experiment::Table, f),
        Command::Qh3dCheck(f) => (Experiment::Qh3dCheck, f),
    };
    let cfg = ExperimentConfig::resolve(experiment, flags.config.as_deref(), &flags.overrides())?;
    let seed = ("seed", cfg.seed.to_string());
    let formulation = ("formulation", cfg.formulation.name().to_string());
    match experiment {
        Experiment::Spectra => {
            let run = run_spectra(&cfg)?;
            let rank = ("skeleton_rank", run.rank.to_string());
            Ok(write_outputs(&cfg, output::SPECTRA_HEADER, &spectra_rows(&run), &[seed, formulation, rank])?)
        }
        Experiment::Refine | Experiment::Table => {
            let rows = run_sizes(&cfg, |row| eprintln!("N = {}: {}", row.n(), row.status()));
            let (header, cells) = if experiment == Experiment::Refine {
                (output::REFINE_HEADER, refine_rows(&rows))
            } else {
                (output::TABLE_HEADER, table_rows(&rows))
            };
            let path = write_outputs(&cfg, header, &cells, &[seed, formulation])?;
            if let Some(RowStatus::Failed { n, reason }) = rows.iter().find(|r| matches!(r, RowStatus::Failed { .. })) {
                return Err(CliError::Numerical(format!("N = {n}: {reason}")));
            }
            Ok(path)
        }
        Experiment::Qh3dCheck => {
            let rows = run_qh3d_check()?;
            let path = write_outputs(&cfg, output::QH3D_HEADER, &qh3d_rows(&rows), &[])?;
            if let Some(r) = rows.iter().find(|r| !r.pass) {
                return Err(CliError::Numerical(format!("projector invariants fail on {}", r.check.name)));
            }
            Ok(path)
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(path) => {
            println!("{}", path.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
