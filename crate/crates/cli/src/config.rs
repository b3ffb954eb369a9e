//! Run configuration: a JSON document with `params`, `axes`, `output` and
//! `compute` sections, plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use magnon_core::experiments::{Axis, AxisSpec, Channel};
use magnon_core::lindblad::ThermalConfig;
use magnon_core::EffectiveParams;

use crate::error::CliError;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "MAGNON_SIM_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    SteadyState,
    Sweep1d,
    Sweep2d,
    OptimalDelta,
    OptimalCurve,
    ThermalSweep,
    ValidateAdiabatic,
    Convergence,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::SteadyState => "steady-state",
            Self::Sweep1d => "sweep1d",
            Self::Sweep2d => "sweep2d",
            Self::OptimalDelta => "optimal-delta",
            Self::OptimalCurve => "optimal-curve",
            Self::ThermalSweep => "thermal-sweep",
            Self::ValidateAdiabatic => "validate-adiabatic",
            Self::Convergence => "convergence",
        }
    }

    /// Axes used when the configuration names none.
    fn default_axes(self) -> Vec<AxisConfig> {
        match self {
            Self::Sweep1d => vec![AxisConfig::new("delta1", -1.0, 1.0, 401)],
            Self::Sweep2d => vec![
                AxisConfig::new("delta1", -1.0, 1.0, 161),
                AxisConfig::new("g_ratio", 0.0, 0.5, 161),
            ],
            Self::OptimalCurve => vec![
                AxisConfig::new("g_ratio", 0.0, 0.5, 51),
                AxisConfig::new("delta_q", 0.0, 0.2, 5),
            ],
            _ => Vec::new(),
        }
    }
}

/// Model parameters in units of κ, plus the absolute scales used for
/// thermal occupations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub delta1: f64,
    pub delta2: f64,
    pub delta_q: f64,
    pub g1: f64,
    pub g2: f64,
    /// Sets `g2 = g_ratio * g1` when present.
    pub g_ratio: Option<f64>,
    pub omega_drive: f64,
    pub gamma: f64,
    pub n_th1: f64,
    pub n_th2: f64,
    /// Angular frequencies in rad/s.
    pub kappa_hz: f64,
    pub omega1_hz: f64,
    pub omega2_hz: f64,
    /// Upper end of the thermal sweep, kelvin.
    pub temperature_max: f64,
    /// Cavity detuning for the adiabatic validation.
    pub delta0: f64,
    pub cavity_decay: f64,
    pub search_min: f64,
    pub search_max: f64,
}

impl Default for Params {
    fn default() -> Self {
        let p = EffectiveParams::reference();
        let t = ThermalConfig::yig_defaults(0.0);
        Self {
            delta1: p.delta1,
            delta2: p.delta2,
            delta_q: p.delta_q,
            g1: p.g1,
            g2: p.g2,
            g_ratio: None,
            omega_drive: p.omega_drive,
            gamma: p.gamma,
            n_th1: p.n_th1,
            n_th2: p.n_th2,
            kappa_hz: t.kappa_absolute,
            omega1_hz: t.omega1,
            omega2_hz: t.omega2,
            temperature_max: 10e-3,
            delta0: 200.0,
            cavity_decay: 0.0,
            search_min: -1.0,
            search_max: 1.0,
        }
    }
}

impl Params {
    pub fn effective(&self) -> EffectiveParams {
        let p = EffectiveParams {
            delta1: self.delta1,
            delta2: self.delta2,
            delta_q: self.delta_q,
            g1: self.g1,
            g2: self.g2,
            omega_drive: self.omega_drive,
            kappa: 1.0,
            gamma: self.gamma,
            n_th1: self.n_th1,
            n_th2: self.n_th2,
        };
        match self.g_ratio {
            Some(r) => p.with_ratio(r),
            None => p,
        }
    }

    pub fn thermal(&self) -> ThermalConfig {
        ThermalConfig {
            omega1: self.omega1_hz,
            omega2: self.omega2_hz,
            temperature: 0.0,
            kappa_absolute: self.kappa_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisConfig {
    pub fn new(name: &str, min: f64, max: f64, count: usize) -> Self {
        Self {
            name: name.to_string(),
            min,
            max,
            count,
        }
    }

    /// Parses `name:min:max:count`.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = |m: String| CliError::config("axis", None, m);
        if parts.len() != 4 {
            return Err(bad(format!("expected name:min:max:count, got `{s}`")));
        }
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("`{v}` is not a number")))
        };
        let count = parts[3]
            .trim()
            .parse::<usize>()
            .map_err(|_| bad(format!("`{}` is not a count", parts[3])))?;
        Ok(Self::new(parts[0].trim(), num(parts[1])?, num(parts[2])?, count))
    }

    pub fn spec(&self) -> Result<AxisSpec, CliError> {
        let axis = axis_by_name(&self.name)?;
        Ok(AxisSpec::linspace(axis, self.min, self.max, self.count)?)
    }
}

fn axis_by_name(name: &str) -> Result<Axis, CliError> {
    Axis::from_name(name).ok_or_else(|| {
        CliError::config(
            "axes.name",
            None,
            format!("unknown axis `{name}`"),
        )
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    /// CSV for tabular results, JSON otherwise.
    #[default]
    Auto,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Standard output when absent.
    pub path: Option<PathBuf>,
    pub format: Format,
    /// Heatmap destination for `sweep2d`.
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComputeConfig {
    pub channel: Channel,
    pub truncation: usize,
    pub cavity_truncation: usize,
    /// Falls back to the environment, then to 1.
    pub workers: Option<usize>,
    /// Magnon truncations compared by `convergence`.
    pub truncations: Vec<usize>,
}

impl Default for ComputeConfig {
    fn default() -> Self {
        Self {
            channel: Channel::Both,
            truncation: 4,
            cavity_truncation: 2,
            workers: None,
            truncations: vec![3, 4, 5, 6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    #[serde(default)]
    pub params: Params,
    /// Subcommand defaults apply when empty.
    #[serde(default)]
    pub axes: Vec<AxisConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub compute: ComputeConfig,
}

impl RunConfig {
    pub fn new(subcommand: Subcommand) -> Self {
        Self {
            subcommand,
            params: Params::default(),
            axes: Vec::new(),
            output: OutputConfig::default(),
            compute: ComputeConfig::default(),
        }
    }

    pub fn axes_or_default(&self) -> Vec<AxisConfig> {
        if self.axes.is_empty() {
            self.subcommand.default_axes()
        } else {
            self.axes.clone()
        }
    }

    pub fn workers(&self) -> usize {
        self.compute.workers.unwrap_or(1)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.params;
        let finite = [
            ("delta1", p.delta1),
            ("delta2", p.delta2),
            ("delta_q", p.delta_q),
            ("g1", p.g1),
            ("g2", p.g2),
            ("g_ratio", p.g_ratio.unwrap_or(0.0)),
            ("omega_drive", p.omega_drive),
            ("gamma", p.gamma),
            ("n_th1", p.n_th1),
            ("n_th2", p.n_th2),
            ("kappa_hz", p.kappa_hz),
            ("omega1_hz", p.omega1_hz),
            ("omega2_hz", p.omega2_hz),
            ("temperature_max", p.temperature_max),
            ("delta0", p.delta0),
            ("cavity_decay", p.cavity_decay),
            ("search_min", p.search_min),
            ("search_max", p.search_max),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(CliError::config(key, None, "must be finite"));
            }
        }
        if p.gamma <= 0.0 {
            return Err(CliError::config("gamma", None, "must be positive"));
        }
        if p.n_th1 < 0.0 || p.n_th2 < 0.0 {
            return Err(CliError::config("n_th1", None, "occupations must be non-negative"));
        }
        if p.kappa_hz <= 0.0 || p.omega1_hz <= 0.0 || p.omega2_hz <= 0.0 {
            return Err(CliError::config("kappa_hz", None, "absolute frequencies must be positive"));
        }
        if p.temperature_max <= 0.0 {
            return Err(CliError::config("temperature_max", None, "must be positive"));
        }
        if p.search_min >= p.search_max {
            return Err(CliError::config("search_min", None, "must be below search_max"));
        }
        if p.cavity_decay < 0.0 {
            return Err(CliError::config("cavity_decay", None, "must be non-negative"));
        }
        if self.compute.workers == Some(0) {
            return Err(CliError::config("workers", None, "must be at least 1"));
        }
        if self.compute.truncation < 3 {
            return Err(CliError::config("truncation", None, "must be at least 3"));
        }
        if self.compute.cavity_truncation < 1 {
            return Err(CliError::config("cavity_truncation", None, "must be at least 1"));
        }
        for a in &self.axes {
            if a.count < 2 {
                return Err(CliError::config(
                    "axes.count",
                    None,
                    format!("axis `{}` needs at least 2 points, got {}", a.name, a.count),
                ));
            }
            if !(a.min.is_finite() && a.max.is_finite()) || a.min == a.max {
                return Err(CliError::config(
                    "axes.min",
                    None,
                    format!("axis `{}` needs distinct finite bounds", a.name),
                ));
            }
            axis_by_name(&a.name)?;
        }
        let expected = match self.subcommand {
            Subcommand::Sweep1d => Some(1),
            Subcommand::Sweep2d | Subcommand::OptimalCurve => Some(2),
            _ => None,
        };
        if let Some(n) = expected {
            if !self.axes.is_empty() && self.axes.len() != n {
                return Err(CliError::config(
                    "axes",
                    None,
                    format!("{} takes {n} axis specification(s), got {}", self.subcommand.name(), self.axes.len()),
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Mirror of [`RunConfig`] whose subcommand may come from the command line.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    subcommand: Option<Subcommand>,
    #[serde(default)]
    params: Params,
    #[serde(default)]
    axes: Vec<AxisConfig>,
    #[serde(default)]
    output: OutputConfig,
    #[serde(default)]
    compute: ComputeConfig,
}

/// Parses a configuration document. A subcommand given on the command
/// line replaces the one in the document.
pub fn parse_config_str(text: &str, cli_subcommand: Option<Subcommand>) -> Result<RunConfig, CliError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| json_error(&e))?;
    let subcommand = cli_subcommand
        .or(raw.subcommand)
        .ok_or_else(|| CliError::config("subcommand", None, "no subcommand given"))?;
    let cfg = RunConfig {
        subcommand,
        params: raw.params,
        axes: raw.axes,
        output: raw.output,
        compute: raw.compute,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config_file(path: &Path, cli_subcommand: Option<Subcommand>) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_config_str(&text, cli_subcommand)
}

fn json_error(e: &serde_json::Error) -> CliError {
    let (key, message) = split_serde_message(&e.to_string());
    CliError::config(&key, Some(e.line()), message)
}

/// Pulls the offending field name out of a serde message when it has one.
fn split_serde_message(msg: &str) -> (String, String) {
    let key = msg
        .split('`')
        .nth(1)
        .filter(|_| msg.contains("field"))
        .unwrap_or("config")
        .to_string();
    let msg = msg.split(" at line ").next().unwrap_or(msg).to_string();
    (key, msg)
}

/// Applies one `key=value` override. Keys are either `section.field` or
/// a bare field name that is unique across sections.
pub fn apply_override(cfg: &mut RunConfig, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| {
        CliError::config(assignment, None, "expected key=value")
    })?;
    let key = key.trim();
    let mut doc = serde_json::to_value(&*cfg).expect("config serializes");
    let (section, field) = resolve_key(&doc, key)?;
    let value = parse_value(raw.trim());
    match section {
        Some(s) => doc[s.as_str()][field.as_str()] = value,
        None => doc[field.as_str()] = value,
    }
    let updated: RunConfig = serde_json::from_value(doc).map_err(|e| {
        CliError::config(key, None, format!("invalid value `{}`: {}", raw.trim(), split_serde_message(&e.to_string()).1))
    })?;
    updated.validate()?;
    *cfg = updated;
    Ok(())
}

fn resolve_key(doc: &Value, key: &str) -> Result<(Option<String>, String), CliError> {
    let sections = ["params", "output", "compute"];
    if let Some((s, f)) = key.split_once('.') {
        if sections.contains(&s) && doc[s].get(f).is_some() {
            return Ok((Some(s.to_string()), f.to_string()));
        }
        return Err(CliError::config(key, None, "unknown key"));
    }
    if key == "axes" || key == "subcommand" {
        return Ok((None, key.to_string()));
    }
    let hits: Vec<&str> = sections
        .iter()
        .copied()
        .filter(|s| doc[*s].get(key).is_some())
        .collect();
    match hits.as_slice() {
        [s] => Ok((Some(s.to_string()), key.to_string())),
        [] => Err(CliError::config(key, None, "unknown key")),
        _ => Err(CliError::config(key, None, format!("ambiguous key, qualify it with one of {hits:?}"))),
    }
}

/// JSON literal when it parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}
