use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use magnon_cli::config::{AxisConfig, Format, WORKERS_ENV};
use magnon_cli::{apply_override, parse_config_file, render, run, CliError, RunConfig, Subcommand};

/// Magnon blockade simulator.
#[derive(Debug, Parser)]
#[command(name = "magnon-sim", version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration value, e.g. `delta2=0.1`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Sweep axis; repeat for two axes.
    #[arg(long = "axis", value_name = "NAME:MIN:MAX:COUNT")]
    axis: Vec<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Heatmap file for `sweep2d`.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads; defaults to $MAGNON_SIM_WORKERS, then 1.
    #[arg(long)]
    workers: Option<usize>,
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config_file(path, Some(cli.subcommand))?,
        None => RunConfig::new(cli.subcommand),
    };
    for s in &cli.set {
        apply_override(&mut cfg, s)?;
    }
    if !cli.axis.is_empty() {
        cfg.axes = cli
            .axis
            .iter()
            .map(|a| AxisConfig::parse(a))
            .collect::<Result<_, _>>()?;
    }
    if let Some(p) = &cli.out {
        cfg.output.path = Some(p.clone());
    }
    if let Some(p) = &cli.svg {
        cfg.output.svg = Some(p.clone());
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    if cli.workers.is_some() {
        cfg.compute.workers = cli.workers;
    }
    if cfg.compute.workers.is_none() {
        if let Ok(v) = std::env::var(WORKERS_ENV) {
            let n = v.trim().parse::<usize>().map_err(|_| {
                CliError::config(WORKERS_ENV, None, format!("`{v}` is not a worker count"))
            })?;
            cfg.compute.workers = Some(n);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = build_config(cli)?;
    let out = run(&cfg)?;
    let (doc, svg) = render(&cfg, &out, magnon_cli::output::timestamp())?;
    if let (Some(path), Some(svg)) = (&cfg.output.svg, &svg) {
        write_file(path, svg)?;
    }
    match &cfg.output.path {
        Some(path) => {
            write_file(path, &doc)?;
            let minima = out.grid.as_ref().map(|g| &g.minima);
            println!(
                "{}",
                json!({
                    "status": "ok",
                    "subcommand": cfg.subcommand.name(),
                    "output": path,
                    "svg": cfg.output.svg,
                    "minima": minima,
                })
            );
        }
        None => print!("{doc}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json(None));
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json(Some(cli.subcommand.name())));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
