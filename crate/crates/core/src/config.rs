//! Experiment configuration: a flat `key = value` format with `#` comments.
//!
//! ```text
//! # convergence at the finer resolution
//! preset = paper
//! eps_list = 0.1, 0.01, 0.001
//! t_final = 2
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use log::warn;

use crate::coefficients::{CoefficientSpec, Scale, SmoothFn};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::solver::Dissipation;

/// The six regularization parameters of the experiments.
pub const PAPER_EPS: [f64; 6] = [0.1, 0.05, 0.01, 0.005, 0.001, 0.0005];

/// The seven exponents of the homogeneous-distribution sweep.
pub const PAPER_ALPHAS: [f64; 7] = [0.0, -0.1, -0.25, -0.5, -0.75, -0.9, -1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Convergence,
    Blowup,
    AlphaSweep,
    Solve,
    Check,
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "convergence" => Self::Convergence,
            "blowup" => Self::Blowup,
            "alpha_sweep" | "alpha-sweep" => Self::AlphaSweep,
            "solve" => Self::Solve,
            "check" => Self::Check,
            _ => return Err(format!("unknown experiment '{s}'")),
        })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Convergence => "convergence",
            Self::Blowup => "blowup",
            Self::AlphaSweep => "alpha_sweep",
            Self::Solve => "solve",
            Self::Check => "check",
        })
    }
}

/// Spatial resolution preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preset {
    /// `dx = 0.002`, 4001 nodes on `[-4, 4]`.
    #[default]
    Desk,
    /// `dx = 0.0005`, 16001 nodes on `[-4, 4]`.
    Paper,
}

impl Preset {
    pub fn dx(self) -> f64 {
        match self {
            Preset::Desk => 0.002,
            Preset::Paper => 0.0005,
        }
    }
}

impl FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "desk" => Ok(Preset::Desk),
            "paper" | "paper-resolution" => Ok(Preset::Paper),
            _ => Err(format!("unknown preset '{s}' (expected desk or paper)")),
        }
    }
}

/// The principal coefficient of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientChoice {
    Heaviside,
    Delta,
    ChiAlpha(f64),
    /// `a = c`, left unmollified.
    Constant(f64),
}

impl CoefficientChoice {
    pub fn spec(self, jump_location: f64) -> Result<CoefficientSpec> {
        Ok(match self {
            Self::Heaviside => CoefficientSpec::heaviside(),
            Self::Delta => CoefficientSpec::delta(),
            Self::ChiAlpha(alpha) => CoefficientSpec::chi_alpha(alpha)?,
            Self::Constant(c) => CoefficientSpec::smooth(SmoothFn::constant(c)),
        }
        .at(jump_location))
    }
}

impl fmt::Display for CoefficientChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Heaviside => f.write_str("heaviside"),
            Self::Delta => f.write_str("delta"),
            Self::ChiAlpha(a) => write!(f, "chi_alpha({a})"),
            Self::Constant(c) => write!(f, "constant({c})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub coefficient: CoefficientChoice,
    pub jump_location: f64,
    pub eps_list: Vec<f64>,
    pub alpha_list: Option<Vec<f64>>,
    pub t_final: f64,
    pub x_min: f64,
    pub x_max: f64,
    /// Explicit spacing; when absent the preset decides.
    pub dx_override: Option<f64>,
    pub preset: Preset,
    pub cfl_target: f64,
    pub scale: Scale,
    pub dissipation: Dissipation,
    pub output_csv: Option<PathBuf>,
    pub output_svg: Option<PathBuf>,
    /// Snapshot file of the `solve` experiment.
    pub snapshots: Option<PathBuf>,
    pub record_every: usize,
}

impl ExperimentConfig {
    /// Defaults of each experiment on `[-4, 4]` at the desk preset.
    pub fn defaults(experiment: Experiment) -> Self {
        let (coefficient, t_final, cfl_target) = match experiment {
            Experiment::Convergence => (CoefficientChoice::Heaviside, 2.0, 1.0),
            Experiment::Blowup => (CoefficientChoice::Delta, 0.05, 1.0),
            Experiment::AlphaSweep => (CoefficientChoice::ChiAlpha(0.0), 0.05, 1.0),
            Experiment::Solve => (CoefficientChoice::Heaviside, 2.0, 0.9),
            Experiment::Check => (CoefficientChoice::Heaviside, 2.0, 0.9),
        };
        let eps_list = match experiment {
            Experiment::Solve => vec![0.01],
            Experiment::Check => vec![0.1, 0.05, 0.01],
            _ => PAPER_EPS.to_vec(),
        };
        Self {
            experiment,
            coefficient,
            jump_location: 0.0,
            eps_list,
            alpha_list: (experiment == Experiment::AlphaSweep).then(|| PAPER_ALPHAS.to_vec()),
            t_final,
            x_min: -4.0,
            x_max: 4.0,
            dx_override: None,
            preset: Preset::Desk,
            cfl_target,
            scale: Scale::Identity,
            dissipation: Dissipation::Local,
            output_csv: None,
            output_svg: None,
            snapshots: None,
            record_every: 0,
        }
    }

    pub fn dx(&self) -> f64 {
        self.dx_override.unwrap_or_else(|| self.preset.dx())
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::with_spacing(self.x_min, self.x_max, self.dx())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.eps_list.is_empty() {
            return bad("eps_list is empty".into());
        }
        if let Some(e) = self.eps_list.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return bad(format!("eps values must lie in (0, 1], got {e}"));
        }
        if self.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("eps_list must be strictly decreasing".into());
        }
        if let Some(alphas) = &self.alpha_list {
            if alphas.is_empty() {
                return bad("alpha_list is empty".into());
            }
            if let Some(a) = alphas.iter().find(|a| !(**a >= -1.0 && **a <= 0.0)) {
                return bad(format!("alpha values must lie in [-1, 0], got {a}"));
            }
        }
        if let CoefficientChoice::ChiAlpha(a) = self.coefficient {
            if !(-1.0..=0.0).contains(&a) {
                return bad(format!("alpha must lie in [-1, 0], got {a}"));
            }
        }
        if let CoefficientChoice::Constant(c) = self.coefficient {
            if !(c >= 0.0 && c.is_finite()) {
                return bad(format!("constant coefficient must be non-negative, got {c}"));
            }
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be non-negative, got {}", self.t_final));
        }
        if !(self.cfl_target > 0.0 && self.cfl_target <= 1.0) {
            return bad(format!("cfl_target must lie in (0, 1], got {}", self.cfl_target));
        }
        let grid = self.grid().map_err(|e| Error::Validation(e.to_string()))?;
        if grid.node_index(self.jump_location).is_none() {
            warn!("jump location {} is not a grid node", self.jump_location);
        }
        match (self.experiment, self.coefficient) {
            (Experiment::Convergence, CoefficientChoice::Heaviside) => {}
            (Experiment::Convergence, c) => {
                return bad(format!("convergence compares against the Heaviside solution, got {c}"))
            }
            (Experiment::AlphaSweep, _) if self.alpha_list.is_none() => {
                return bad("alpha_sweep needs alpha_list".into())
            }
            _ => {}
        }
        Ok(())
    }
}

fn parse_list(value: &str) -> std::result::Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("'{}': {e}", s.trim())))
        .collect()
}

fn parse_coefficient(value: &str) -> std::result::Result<CoefficientChoice, String> {
    let value = value.trim();
    if let Some(inner) = value.strip_prefix("chi_alpha(").and_then(|r| r.strip_suffix(')')) {
        return inner
            .trim()
            .parse()
            .map(CoefficientChoice::ChiAlpha)
            .map_err(|e| format!("alpha: {e}"));
    }
    if let Some(inner) = value.strip_prefix("constant(").and_then(|r| r.strip_suffix(')')) {
        return inner
            .trim()
            .parse()
            .map(CoefficientChoice::Constant)
            .map_err(|e| format!("constant: {e}"));
    }
    match value {
        "heaviside" => Ok(CoefficientChoice::Heaviside),
        "delta" => Ok(CoefficientChoice::Delta),
        "chi_alpha" => Ok(CoefficientChoice::ChiAlpha(0.0)),
        _ => Err(format!(
            "unknown coefficient '{value}' (heaviside, delta, chi_alpha(a), constant(c))"
        )),
    }
}

/// Parses a config for `experiment`; absent keys keep the experiment defaults.
pub fn parse_config(text: &str, experiment: Experiment) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::defaults(experiment);
    let mut alpha: Option<f64> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| perr(format!("expected 'key = value', got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(perr(format!("missing value for '{key}'")));
        }
        let num = |v: &str| v.parse::<f64>().map_err(|e| perr(format!("{key}: {e}")));
        match key {
            "experiment" => {
                let e: Experiment = value.parse().map_err(perr)?;
                if e != experiment {
                    return Err(Error::Validation(format!(
                        "config is for '{e}' but '{experiment}' was requested"
                    )));
                }
            }
            "coefficient" => cfg.coefficient = parse_coefficient(value).map_err(perr)?,
            "alpha" => alpha = Some(num(value)?),
            "jump_location" => cfg.jump_location = num(value)?,
            "eps_list" => cfg.eps_list = parse_list(value).map_err(perr)?,
            "alpha_list" => cfg.alpha_list = Some(parse_list(value).map_err(perr)?),
            "t_final" => cfg.t_final = num(value)?,
            "x_min" => cfg.x_min = num(value)?,
            "x_max" => cfg.x_max = num(value)?,
            "dx" => cfg.dx_override = Some(num(value)?),
            "cfl_target" => cfg.cfl_target = num(value)?,
            "preset" | "resolution_preset" => cfg.preset = value.parse().map_err(perr)?,
            "scale" => {
                cfg.scale = match value {
                    "identity" => Scale::Identity,
                    "logarithmic" => Scale::Logarithmic,
                    _ => return Err(perr(format!("unknown scale '{value}'"))),
                }
            }
            "dissipation" => {
                cfg.dissipation = match value {
                    "local" => Dissipation::Local,
                    "global" => Dissipation::Global,
                    _ => return Err(perr(format!("unknown dissipation '{value}'"))),
                }
            }
            "output_csv" => cfg.output_csv = Some(PathBuf::from(value)),
            "output_svg" => cfg.output_svg = Some(PathBuf::from(value)),
            "snapshots" => cfg.snapshots = Some(PathBuf::from(value)),
            "record_every" => {
                cfg.record_every = value.parse().map_err(|e| perr(format!("{key}: {e}")))?
            }
            _ => return Err(perr(format!("unknown key '{key}'"))),
        }
    }
    if let Some(a) = alpha {
        cfg.coefficient = CoefficientChoice::ChiAlpha(a);
    }
    cfg.validate()?;
    Ok(cfg)
}
