//! Line-oriented `key = value` experiment configuration.
//!
//! ```text
//! # Ising L = 16, accelerated
//! model = ising
//! L = 16
//! algorithm = awl
//! beta = 0.9
//! eta0 = 1.0
//! max_sweeps = 100000
//! seeds = 1, 2, 3
//! reference_dos = exact
//! ```
//!
//! `reference_dos` is either a path to a DOS CSV file or the word `exact`, which
//! asks for the enumerated DOS (small systems only).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimator::Algorithm;
use crate::model::{ModelKind, ModelSpec};
use crate::thermo::{Anchor, TemperatureGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgorithmKind {
    Wl,
    Awl,
}

impl AlgorithmKind {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Wl => "wl",
            AlgorithmKind::Awl => "awl",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReferenceSource {
    /// Exhaustive enumeration of the configured model.
    Exact,
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub algorithm: AlgorithmKind,
    pub beta: f64,
    pub eta0: f64,
    pub check_interval_sweeps: u64,
    pub max_sweeps: u64,
    pub eta_min: f64,
    pub seeds: Vec<u64>,
    pub walkers: usize,
    pub reference_dos: Option<ReferenceSource>,
    /// `None` when the config does not ask for a particular anchor.
    pub anchor: Option<Anchor>,
    pub temperature_grid: TemperatureGrid,
    pub trace_stride_sweeps: u64,
    pub output_dir: PathBuf,
}

pub const DEFAULT_BETA: f64 = 0.9;
pub const DEFAULT_CHECK_INTERVAL_SWEEPS: u64 = 1000;
pub const DEFAULT_ETA_MIN: f64 = 1e-8;
pub const DEFAULT_TRACE_STRIDE_SWEEPS: u64 = 100;
pub const DEFAULT_POTTS_Q: u32 = 10;

const KEYS: &[&str] = &[
    "model",
    "L",
    "q",
    "algorithm",
    "beta",
    "eta0",
    "check_interval_sweeps",
    "max_sweeps",
    "eta_min",
    "seeds",
    "walkers",
    "reference_dos",
    "anchor",
    "t_start",
    "t_stop",
    "t_step",
    "trace_stride_sweeps",
    "output_dir",
];

impl ExperimentConfig {
    /// Config with every optional key at its default.
    pub fn new(
        model: ModelSpec,
        algorithm: AlgorithmKind,
        eta0: f64,
        max_sweeps: u64,
        seeds: Vec<u64>,
    ) -> Self {
        ExperimentConfig {
            model,
            algorithm,
            beta: DEFAULT_BETA,
            eta0,
            check_interval_sweeps: DEFAULT_CHECK_INTERVAL_SWEEPS,
            max_sweeps,
            eta_min: DEFAULT_ETA_MIN,
            seeds,
            walkers: 1,
            reference_dos: None,
            anchor: None,
            temperature_grid: TemperatureGrid::default(),
            trace_stride_sweeps: DEFAULT_TRACE_STRIDE_SWEEPS,
            output_dir: PathBuf::from("output"),
        }
    }

    pub fn estimator_algorithm(&self) -> Algorithm {
        match self.algorithm {
            AlgorithmKind::Wl => Algorithm::Wl,
            AlgorithmKind::Awl => Algorithm::Awl { beta: self.beta },
        }
    }

    /// Effective anchor for ε.
    pub fn anchor_or_default(&self) -> Anchor {
        self.anchor.unwrap_or_default()
    }

    /// Checks the cross-field constraints.
    pub fn validate(&self) -> Result<()> {
        self.check_values().map_err(|(_, msg)| Error::Config(msg))
    }

    // Returns the offending key with the message.
    fn check_values(&self) -> std::result::Result<(), (&'static str, String)> {
        if !(self.eta_min > 0.0) {
            return Err(("eta_min", format!("eta_min must be positive, got {}", self.eta_min)));
        }
        if !(self.eta0 > self.eta_min) || !self.eta0.is_finite() {
            return Err((
                "eta0",
                format!("eta0 ({}) must exceed eta_min ({})", self.eta0, self.eta_min),
            ));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(("beta", format!("beta must lie in [0, 1), got {}", self.beta)));
        }
        if self.check_interval_sweeps == 0 {
            return Err(("check_interval_sweeps", "check_interval_sweeps must be at least 1".into()));
        }
        if self.trace_stride_sweeps == 0 {
            return Err(("trace_stride_sweeps", "trace_stride_sweeps must be at least 1".into()));
        }
        if self.walkers == 0 {
            return Err(("walkers", "walkers must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(("seeds", "at least one seed is required".into()));
        }
        if self.anchor.is_some() && self.reference_dos.is_none() {
            return Err((
                "anchor",
                "an anchor was given but there is no reference_dos to compute epsilon against"
                    .into(),
            ));
        }
        Ok(())
    }

    /// Renders the config in the format accepted by [`parse_config`].
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let m = &self.model;
        let _ = writeln!(s, "model = {}", m.kind().name());
        let _ = writeln!(s, "L = {}", m.side());
        let _ = writeln!(s, "q = {}", m.q());
        let _ = writeln!(s, "algorithm = {}", self.algorithm.name());
        let _ = writeln!(s, "beta = {:?}", self.beta);
        let _ = writeln!(s, "eta0 = {:?}", self.eta0);
        let _ = writeln!(s, "check_interval_sweeps = {}", self.check_interval_sweeps);
        let _ = writeln!(s, "max_sweeps = {}", self.max_sweeps);
        let _ = writeln!(s, "eta_min = {:?}", self.eta_min);
        let seeds: Vec<String> = self.seeds.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(s, "seeds = {}", seeds.join(", "));
        let _ = writeln!(s, "walkers = {}", self.walkers);
        match &self.reference_dos {
            Some(ReferenceSource::Exact) => {
                let _ = writeln!(s, "reference_dos = exact");
            }
            Some(ReferenceSource::File(p)) => {
                let _ = writeln!(s, "reference_dos = {}", p.display());
            }
            None => {}
        }
        if let Some(a) = self.anchor {
            let _ = writeln!(s, "anchor = {}", a.name());
        }
        let g = &self.temperature_grid;
        let _ = writeln!(s, "t_start = {:?}", g.start());
        let _ = writeln!(s, "t_stop = {:?}", g.stop());
        let _ = writeln!(s, "t_step = {:?}", g.step());
        let _ = writeln!(s, "trace_stride_sweeps = {}", self.trace_stride_sweeps);
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        s
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::ConfigLine {
        line,
        message: format!("cannot parse `{value}` as the value of `{key}`"),
    })
}

/// Parses a config file. Unknown or repeated keys are errors; absent optional
/// keys take their defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut entries: HashMap<&str, (String, usize)> = HashMap::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigLine {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let known = KEYS.iter().find(|&&k| k == key).ok_or_else(|| Error::ConfigLine {
            line: line_no,
            message: format!("unknown key `{key}`"),
        })?;
        if value.is_empty() {
            return Err(Error::ConfigLine {
                line: line_no,
                message: format!("`{key}` has no value"),
            });
        }
        if entries.insert(known, (value.to_string(), line_no)).is_some() {
            return Err(Error::ConfigLine {
                line: line_no,
                message: format!("`{key}` given more than once"),
            });
        }
    }

    let get = |key: &str| entries.get(key).map(|(v, l)| (v.as_str(), *l));
    let require = |key: &str| {
        get(key).ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    };
    let line_of = |key: &str| get(key).map_or(0, |(_, l)| l);

    let (model_s, model_line) = require("model")?;
    let kind = match model_s {
        "ising" => ModelKind::Ising,
        "potts" => ModelKind::Potts,
        other => {
            return Err(Error::ConfigLine {
                line: model_line,
                message: format!("unknown model `{other}` (expected ising or potts)"),
            })
        }
    };
    let (l_s, l_line) = require("L")?;
    let side: usize = parse_value("L", l_s, l_line)?;
    let q = match get("q") {
        Some((v, line)) => parse_value("q", v, line)?,
        None => match kind {
            ModelKind::Ising => 2,
            ModelKind::Potts => DEFAULT_POTTS_Q,
        },
    };
    let model = ModelSpec::new(kind, side, q).map_err(|e| Error::ConfigLine {
        line: if side < 2 || !side.is_multiple_of(2) { l_line } else { line_of("q").max(model_line) },
        message: e.to_string(),
    })?;

    let (alg_s, alg_line) = require("algorithm")?;
    let algorithm = match alg_s {
        "wl" => AlgorithmKind::Wl,
        "awl" => AlgorithmKind::Awl,
        other => {
            return Err(Error::ConfigLine {
                line: alg_line,
                message: format!("unknown algorithm `{other}` (expected wl or awl)"),
            })
        }
    };
    let (eta_s, eta_line) = require("eta0")?;
    let eta0 = parse_value("eta0", eta_s, eta_line)?;
    let (ms_s, ms_line) = require("max_sweeps")?;
    let max_sweeps: u64 = parse_value("max_sweeps", ms_s, ms_line)?;
    if max_sweeps == 0 {
        return Err(Error::ConfigLine {
            line: ms_line,
            message: "max_sweeps must be at least 1".into(),
        });
    }
    let (seeds_s, seeds_line) = require("seeds")?;
    let seeds = seeds_s
        .split(',')
        .map(|s| parse_value("seeds", s.trim(), seeds_line))
        .collect::<Result<Vec<u64>>>()?;

    let mut config = ExperimentConfig::new(model, algorithm, eta0, max_sweeps, seeds);
    if let Some((v, l)) = get("beta") {
        config.beta = parse_value("beta", v, l)?;
    }
    if let Some((v, l)) = get("check_interval_sweeps") {
        config.check_interval_sweeps = parse_value("check_interval_sweeps", v, l)?;
    }
    if let Some((v, l)) = get("eta_min") {
        config.eta_min = parse_value("eta_min", v, l)?;
    }
    if let Some((v, l)) = get("walkers") {
        config.walkers = parse_value("walkers", v, l)?;
    }
    if let Some((v, _)) = get("reference_dos") {
        config.reference_dos = Some(match v {
            "exact" => ReferenceSource::Exact,
            path => ReferenceSource::File(PathBuf::from(path)),
        });
    }
    if let Some((v, l)) = get("anchor") {
        config.anchor = Some(v.parse().map_err(|e: Error| Error::ConfigLine {
            line: l,
            message: e.to_string(),
        })?);
    }
    let defaults = TemperatureGrid::default();
    let mut grid = [defaults.start(), defaults.stop(), defaults.step()];
    for (slot, key) in grid.iter_mut().zip(["t_start", "t_stop", "t_step"]) {
        if let Some((v, l)) = get(key) {
            *slot = parse_value(key, v, l)?;
        }
    }
    config.temperature_grid =
        TemperatureGrid::new(grid[0], grid[1], grid[2]).map_err(|e| Error::ConfigLine {
            line: ["t_start", "t_stop", "t_step"]
                .iter()
                .map(|k| line_of(k))
                .max()
                .unwrap_or(0),
            message: e.to_string(),
        })?;
    if let Some((v, l)) = get("trace_stride_sweeps") {
        config.trace_stride_sweeps = parse_value("trace_stride_sweeps", v, l)?;
    }
    if let Some((v, _)) = get("output_dir") {
        config.output_dir = PathBuf::from(v);
    }

    config.check_values().map_err(|(key, message)| {
        let line = line_of(key);
        if line > 0 {
            Error::ConfigLine { line, message }
        } else {
            Error::Config(message)
        }
    })?;
    Ok(config)
}
