//! Experiment configuration: `key = value` files overridden by flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use opfilter::calderon2d::{CalderonOptions, Formulation, MfieSign, Preconditioner};
use opfilter::excitation2d::Source2D;
use opfilter::geometry::Vec2;
use opfilter::mesh2d::ParametricCurve;

use crate::CliError;

/// Which experiment a configuration drives; selects the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Spectra,
    Refine,
    Table,
    Qh3dCheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectra => "spectra",
            Experiment::Refine => "refine",
            Experiment::Table => "table",
            Experiment::Qh3dCheck => "qh3d-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    PerturbedCircle { r0: f64, amp: f64, lobes: u32 },
}

impl Geometry {
    pub fn curve(&self) -> ParametricCurve {
        match *self {
            Geometry::Circle { radius } => ParametricCurve::circle(radius),
            Geometry::Ellipse { a, b } => ParametricCurve::Ellipse { a, b },
            Geometry::PerturbedCircle { r0, amp, lobes } => ParametricCurve::PerturbedCircle { r0, amp, lobes },
        }
    }

    fn parse(s: &str) -> Result<Self, String> {
        let (kind, args) = split_kind(s)?;
        let v = parse_list(args)?;
        let want = |n: usize| if v.len() == n { Ok(()) } else { Err(format!("geometry {kind:?} takes {n} parameters")) };
        match kind {
            "circle" => want(1).map(|_| Geometry::Circle { radius: v[0] }),
            "ellipse" => want(2).map(|_| Geometry::Ellipse { a: v[0], b: v[1] }),
            "perturbed" => {
                want(3)?;
                if v[2].fract() != 0.0 || v[2] < 0.0 {
                    return Err("perturbed circle lobe count must be a non-negative integer".into());
                }
                Ok(Geometry::PerturbedCircle { r0: v[0], amp: v[1], lobes: v[2] as u32 })
            }
            _ => Err(format!("unknown geometry {kind:?} (circle, ellipse, perturbed)")),
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Geometry::Circle { radius } => write!(f, "circle:{radius}"),
            Geometry::Ellipse { a, b } => write!(f, "ellipse:{a},{b}"),
            Geometry::PerturbedCircle { r0, amp, lobes } => write!(f, "perturbed:{r0},{amp},{lobes}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceSpec {
    Line { x: f64, y: f64 },
    Plane { dx: f64, dy: f64 },
}

impl SourceSpec {
    pub fn source(&self) -> opfilter::Result<Source2D> {
        match *self {
            SourceSpec::Line { x, y } => Ok(Source2D::line_source(Vec2::new(x, y))),
            SourceSpec::Plane { dx, dy } => Source2D::plane_wave(Vec2::new(dx, dy)),
        }
    }

    fn parse(s: &str) -> Result<Self, String> {
        let (kind, args) = split_kind(s)?;
        let v = parse_list(args)?;
        if v.len() != 2 {
            return Err(format!("source {kind:?} takes 2 parameters"));
        }
        match kind {
            "line" => Ok(SourceSpec::Line { x: v[0], y: v[1] }),
            "plane" => Ok(SourceSpec::Plane { dx: v[0], dy: v[1] }),
            _ => Err(format!("unknown source {kind:?} (line, plane)")),
        }
    }
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SourceSpec::Line { x, y } => write!(f, "line:{x},{y}"),
            SourceSpec::Plane { dx, dy } => write!(f, "plane:{dx},{dy}"),
        }
    }
}

fn split_kind(s: &str) -> Result<(&str, &str), String> {
    s.split_once(':').map(|(a, b)| (a.trim(), b.trim())).ok_or_else(|| format!("expected kind:params, got {s:?}"))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',').map(|x| x.trim().parse().map_err(|_| format!("cannot parse {x:?}"))).collect()
}

/// Fully resolved experiment parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub geometry: Geometry,
    pub k: f64,
    pub eta: f64,
    pub source: SourceSpec,
    pub formulation: Formulation,
    pub preconditioner: Preconditioner,
    pub mfie_sign: MfieSign,
    pub filter_n: usize,
    pub epsilon: f64,
    pub sizes: Vec<usize>,
    pub max_n: usize,
    pub out: PathBuf,
    pub seed: u64,
    /// Repetitions for timing; the minimum is reported.
    pub reps: usize,
}

/// Every accepted key, in echo order.
pub const KEYS: &[&str] = &[
    "geometry",
    "k",
    "eta",
    "source",
    "formulation",
    "alpha",
    "preconditioner",
    "mfie_sign",
    "filter_n",
    "epsilon",
    "sizes",
    "max_n",
    "out",
    "seed",
    "reps",
];

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            geometry: Geometry::Ellipse { a: 1.42, b: 1.32 },
            k: 0.4,
            eta: 1.0,
            source: SourceSpec::Line { x: 5.0, y: 0.0 },
            formulation: Formulation::Efie,
            preconditioner: Preconditioner::Helmholtz,
            mfie_sign: MfieSign::Minus,
            filter_n: 200,
            epsilon: 1e-3,
            sizes: vec![1004],
            max_n: 4016,
            out: PathBuf::from("out"),
            seed: 1,
            reps: 5,
        };
        match experiment {
            Experiment::Spectra | Experiment::Qh3dCheck => base,
            Experiment::Refine => Self { epsilon: 6e-6, filter_n: 21, sizes: vec![251, 502, 1004, 2008], ..base },
            Experiment::Table => Self {
                geometry: Geometry::PerturbedCircle { r0: 2.0, amp: 0.2, lobes: 8 },
                sizes: vec![1004, 2008, 4016, 8032],
                ..base
            },
        }
    }

    /// Defaults, then `file` entries, then `overrides` (later wins).
    pub fn resolve(
        experiment: Experiment,
        file: Option<&Path>,
        overrides: &[(String, String)],
    ) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
            entries.extend(parse_config_text(&text)?);
        }
        for (k, v) in overrides {
            entries.insert(normalize_key(k), v.clone());
        }
        let mut cfg = Self::defaults(experiment);
        let mut alpha = None;
        let mut formulation = None;
        for (key, value) in &entries {
            let bad = |m: String| CliError::Validation(format!("{key}: {m}"));
            let num = || value.trim().parse::<f64>().map_err(|_| bad(format!("not a number: {value:?}")));
            let int = || value.trim().parse::<u64>().map_err(|_| bad(format!("not a non-negative integer: {value:?}")));
            match key.as_str() {
                "geometry" => cfg.geometry = Geometry::parse(value).map_err(bad)?,
                "k" => cfg.k = num()?,
                "eta" => cfg.eta = num()?,
                "source" => cfg.source = SourceSpec::parse(value).map_err(bad)?,
                "formulation" => formulation = Some(value.trim().to_ascii_lowercase()),
                "alpha" => alpha = Some(num()?),
                "preconditioner" => {
                    cfg.preconditioner = match value.trim() {
                        "helmholtz" => Preconditioner::Helmholtz,
                        "yukawa" => Preconditioner::Yukawa,
                        v => return Err(bad(format!("unknown preconditioner {v:?}"))),
                    }
                }
                "mfie_sign" => {
                    cfg.mfie_sign = match value.trim() {
                        "minus" | "-" => MfieSign::Minus,
                        "plus" | "+" => MfieSign::Plus,
                        v => return Err(bad(format!("unknown sign {v:?}"))),
                    }
                }
                "filter_n" => cfg.filter_n = int()? as usize,
                "epsilon" => cfg.epsilon = num()?,
                "sizes" => cfg.sizes = parse_list(value).map_err(bad)?,
                "max_n" => cfg.max_n = int()? as usize,
                "out" => cfg.out = PathBuf::from(value.trim()),
                "seed" => cfg.seed = int()?,
                "reps" => cfg.reps = int()? as usize,
                _ => return Err(CliError::Validation(format!("unknown key {key:?}"))),
            }
        }
        let alpha_value = alpha.unwrap_or(Formulation::DEFAULT_ALPHA);
        cfg.formulation = match formulation.as_deref() {
            None => match cfg.formulation {
                Formulation::Cfie { .. } => Formulation::Cfie { alpha: alpha_value },
                f => f,
            },
            Some("efie") => Formulation::Efie,
            Some("mfie") => Formulation::Mfie,
            Some("cfie") => Formulation::Cfie { alpha: alpha_value },
            Some(v) => return Err(CliError::Validation(format!("formulation: unknown {v:?} (efie, mfie, cfie)"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Validation(m.to_string()));
        if let Err(e) = self.geometry.curve().validate() {
            return Err(CliError::Validation(format!("geometry: {e}")));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return bad("k must be positive");
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return bad("eta must be positive");
        }
        if let Err(e) = self.source.source() {
            return Err(CliError::Validation(format!("source: {e}")));
        }
        if let Formulation::Cfie { alpha } = self.formulation {
            if !(alpha.is_finite() && alpha > 0.0) {
                return bad("alpha must be positive");
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon must lie in (0, 1)");
        }
        if self.reps == 0 {
            return bad("reps must be at least 1");
        }
        if self.sizes.iter().any(|&n| n < opfilter::mesh2d::MIN_NODES) {
            return Err(CliError::Validation(format!("sizes must be at least {}", opfilter::mesh2d::MIN_NODES)));
        }
        match self.experiment {
            Experiment::Spectra if self.sizes.len() != 1 => return bad("spectra takes exactly one mesh size"),
            Experiment::Refine if self.sizes.len() < 3 => return bad("refine needs at least three mesh sizes"),
            Experiment::Table if self.sizes.is_empty() => return bad("table needs at least one mesh size"),
            _ => {}
        }
        if self.experiment != Experiment::Qh3dCheck {
            if self.filter_n < 1 {
                return bad("filter_n must be at least 1");
            }
            if let Some(&n) = self.sizes.iter().filter(|&&n| n <= self.max_n).find(|&&n| self.filter_n > n) {
                return Err(CliError::Validation(format!("filter_n {} exceeds mesh size {n}", self.filter_n)));
            }
        }
        Ok(())
    }

    pub fn calderon_options(&self) -> CalderonOptions {
        CalderonOptions { preconditioner: self.preconditioner, mfie_sign: self.mfie_sign, ..CalderonOptions::default() }
    }

    /// `key = value` lines reproducing this configuration.
    pub fn echo(&self) -> String {
        let formulation = self.formulation.name();
        let alpha = match self.formulation {
            Formulation::Cfie { alpha } => alpha,
            _ => Formulation::DEFAULT_ALPHA,
        };
        let preconditioner = match self.preconditioner {
            Preconditioner::Helmholtz => "helmholtz",
            Preconditioner::Yukawa => "yukawa",
        };
        let sign = match self.mfie_sign {
            MfieSign::Minus => "minus",
            MfieSign::Plus => "plus",
        };
        let sizes: Vec<String> = self.sizes.iter().map(|n| n.to_string()).collect();
        let values = [
            self.geometry.to_string(),
            format!("{:e}", self.k),
            format!("{:e}", self.eta),
            self.source.to_string(),
            formulation.to_string(),
            format!("{alpha:e}"),
            preconditioner.to_string(),
            sign.to_string(),
            self.filter_n.to_string(),
            format!("{:e}", self.epsilon),
            sizes.join(","),
            self.max_n.to_string(),
            self.out.display().to_string(),
            self.seed.to_string(),
            self.reps.to_string(),
        ];
        KEYS.iter().zip(values).map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Flags spell keys with dashes; files may use either.
pub fn normalize_key(k: &str) -> String {
    k.trim().trim_start_matches("--").replace('-', "_").to_ascii_lowercase()
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("config line {}: expected key = value", i + 1)))?;
        let key = normalize_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Validation(format!("config line {}: unknown key {key:?}", i + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}
