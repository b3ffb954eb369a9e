//! Subcommand dispatch.

use serde_json::json;

use magnon_core::analytic::optimal_delta1;
use magnon_core::experiments::{
    adiabatic_validation, convergence_check, evaluate_point, optimal_curve, sweep_1d, sweep_2d,
    temperature_grid, thermal_sweep, AdiabaticInputs, Axis, SweepGrid, SweepOptions,
};
use magnon_core::hilbert::BathParams;
use magnon_core::{ExecutionMode, FullModelParams};

use crate::config::{Format, RunConfig, Subcommand};
use crate::error::CliError;
use crate::output::{self, Bundle};
use crate::svg::{render_heatmap, HeatmapStyle};

/// Everything a run produces, before it is written anywhere.
pub struct RunOutput {
    pub bundle: Bundle,
    pub grid: Option<SweepGrid>,
}

impl RunOutput {
    fn json(value: serde_json::Value) -> Self {
        Self {
            bundle: Bundle { csv: None, json: value },
            grid: None,
        }
    }
}

fn options(cfg: &RunConfig) -> SweepOptions {
    SweepOptions {
        truncation: cfg.compute.truncation,
        mode: ExecutionMode::with_workers(cfg.workers()),
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let p = cfg.params.effective();
    p.validate()?;
    let opts = options(cfg);
    let axes = cfg
        .axes_or_default()
        .iter()
        .map(|a| a.spec())
        .collect::<Result<Vec<_>, _>>()?;
    let search = (cfg.params.search_min, cfg.params.search_max);

    Ok(match cfg.subcommand {
        Subcommand::SteadyState => {
            let cell = evaluate_point(&p, cfg.compute.channel, cfg.compute.truncation)?;
            RunOutput::json(json!({
                "params": p,
                "truncation": cfg.compute.truncation,
                "g2_numeric": cell.numeric,
                "g2_analytic": cell.analytic,
                "flag": cell.flag,
                "physicality": cell.physicality,
            }))
        }
        Subcommand::Sweep1d | Subcommand::Sweep2d => {
            let grid = if cfg.subcommand == Subcommand::Sweep1d {
                sweep_1d(&p, &axes[0], cfg.compute.channel, &opts)?
            } else {
                sweep_2d(&p, &axes[0], &axes[1], cfg.compute.channel, &opts)?
            };
            RunOutput {
                bundle: Bundle {
                    csv: Some(output::sweep_table(&grid)),
                    json: output::to_value(&grid),
                },
                grid: Some(grid),
            }
        }
        Subcommand::OptimalDelta => {
            let o = optimal_delta1(&p, search)?;
            RunOutput::json(output::optimal_delta_value(&o, search))
        }
        Subcommand::OptimalCurve => {
            let ratio = axes.iter().position(|a| a.axis == Axis::GRatio);
            let detuning = axes
                .iter()
                .position(|a| matches!(a.axis, Axis::DeltaQ | Axis::Delta2));
            let (Some(r), Some(d)) = (ratio, detuning) else {
                return Err(CliError::config(
                    "axes",
                    None,
                    "optimal-curve needs a g_ratio axis and a delta_q axis",
                ));
            };
            let curve = optimal_curve(&axes[r].values, &axes[d].values, &p, search, &opts)?;
            RunOutput {
                bundle: Bundle {
                    csv: Some(output::curve_table(&curve)),
                    json: output::to_value(&curve),
                },
                grid: None,
            }
        }
        Subcommand::ThermalSweep => {
            let temps = temperature_grid(cfg.params.temperature_max);
            let sets = vec![("config".to_string(), p)];
            let sweep = thermal_sweep(&cfg.params.thermal(), &sets, &temps, &opts)?;
            RunOutput {
                bundle: Bundle {
                    csv: Some(output::thermal_table(&sweep)),
                    json: output::to_value(&sweep),
                },
                grid: None,
            }
        }
        Subcommand::ValidateAdiabatic => {
            let full = FullModelParams::dispersive_for(&p, cfg.params.delta0)?;
            let inputs = AdiabaticInputs {
                cavity_decay: cfg.params.cavity_decay,
                magnon_truncation: cfg.compute.truncation,
                cavity_truncation: cfg.compute.cavity_truncation,
                ..AdiabaticInputs::new(BathParams::from_effective(&p))
            };
            RunOutput::json(output::to_value(&adiabatic_validation(&full, &inputs)?))
        }
        Subcommand::Convergence => {
            RunOutput::json(output::to_value(&convergence_check(&p, &cfg.compute.truncations)?))
        }
    })
}

/// Output format after resolving `auto`.
pub fn resolve_format(cfg: &RunConfig, out: &RunOutput) -> Result<Format, CliError> {
    match (cfg.output.format, out.bundle.csv.is_some()) {
        (Format::Auto, true) => Ok(Format::Csv),
        (Format::Auto, false) => Ok(Format::Json),
        (Format::Csv, false) => Err(CliError::Usage(format!(
            "{} has no tabular output; use json",
            cfg.subcommand.name()
        ))),
        (f, _) => Ok(f),
    }
}

/// Main document plus the optional heatmap.
pub fn render(cfg: &RunConfig, out: &RunOutput, generated: u64) -> Result<(String, Option<String>), CliError> {
    let doc = match resolve_format(cfg, out)? {
        Format::Csv => output::render_csv(cfg, out.bundle.csv.as_ref().expect("checked"), generated),
        _ => output::render_json(cfg, &out.bundle, generated),
    };
    let svg = match (&cfg.output.svg, &out.grid) {
        (None, _) => None,
        (Some(_), Some(grid)) => Some(render_heatmap(grid, &HeatmapStyle::default())?),
        (Some(_), None) => {
            return Err(CliError::Usage(format!(
                "{} produces no grid to draw",
                cfg.subcommand.name()
            )))
        }
    };
    Ok((doc, svg))
}
