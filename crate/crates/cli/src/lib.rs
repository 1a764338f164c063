//! Command-line front end for the `twodrug` model library.
//!
//! Every subcommand reads one JSON config, writes flat files into an output
//! directory and is deterministic: the same config produces byte-identical
//! files.

pub mod analyze;
pub mod config;
pub mod error;
pub mod output;
pub mod portrait;
pub mod regime;
pub mod simulate;
pub mod sweep;
pub mod verify;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use config::{Context, Format, RunConfig};
pub use error::CliError;
use output::{json, write};

pub const OUT_DIR_ENV: &str = "TWODRUG_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "twodrug-out";

#[derive(Debug, Parser)]
#[command(name = "twodrug", version, about = "Two-drug addiction model: analysis, simulation, portraits, sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the config's output.directory.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    /// Report populations as fractions of N.
    #[arg(long, global = true)]
    pub normalized: bool,
    /// Reserved. Nothing here is random, so setting it is an error.
    #[arg(long, global = true)]
    pub seedless: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Coefficients, equilibria, stability and regime.
    Analyze,
    /// Integrate the configured initial states.
    Simulate,
    /// Phase portrait as SVG plus geometry JSON.
    Portrait,
    /// Regime map over one or two rates.
    Sweep,
    /// Recompute the reference study's numbers and compare.
    VerifyPaper,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    /// Printed to stdout.
    pub message: String,
    pub files: Vec<PathBuf>,
    pub exit_code: i32,
}

fn out_dir(cli: &Cli, config: Option<&RunConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| config.and_then(|c| c.output.directory.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn load(cli: &Cli, command: &'static str) -> Result<Context, CliError> {
    let path = cli.config.as_deref().ok_or(CliError::MissingConfig(command))?;
    Context::new(RunConfig::from_path(path)?, cli.normalized)
}

struct Files<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl Files<'_> {
    fn put(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        self.written.push(write(self.dir, name, contents)?);
        Ok(())
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if cli.seedless {
        return Err(CliError::SeedlessReserved);
    }
    let ctx = match cli.command {
        Command::VerifyPaper => None,
        Command::Analyze => Some(load(cli, "analyze")?),
        Command::Simulate => Some(load(cli, "simulate")?),
        Command::Portrait => Some(load(cli, "portrait")?),
        Command::Sweep => Some(load(cli, "sweep")?),
    };
    let dir = out_dir(cli, ctx.as_ref().map(|c| &c.config));
    let mut files = Files { dir: &dir, written: Vec::new() };
    let wants = |f: Format| ctx.as_ref().is_none_or(|c| c.config.output.wants(f));
    let mut message = String::new();
    let mut exit_code = 0;

    match (cli.command, &ctx) {
        (Command::Analyze, Some(ctx)) => {
            let report = analyze::analyze(ctx);
            if wants(Format::Json) {
                files.put("analysis.json", &json(&report))?;
            }
            let text = report.to_text();
            if wants(Format::Text) {
                files.put("analysis.txt", &text)?;
            }
            message = text;
        }
        (Command::Simulate, Some(ctx)) => {
            let out = simulate::simulate(ctx)?;
            if wants(Format::Csv) {
                for (name, csv) in &out.files {
                    files.put(name, csv)?;
                }
            }
            files.put("summary.json", &json(&out.summary))?;
            message = format!("{} run(s), {} failed\n", out.summary.runs.len(), out.summary.failed_runs);
        }
        (Command::Portrait, Some(ctx)) => {
            let (geometry, svg) = portrait::portrait(ctx)?;
            if wants(Format::Svg) {
                files.put("portrait.svg", &svg)?;
            }
            if wants(Format::Json) {
                files.put("portrait.json", &json(&geometry))?;
            }
            for note in &geometry.notes {
                message.push_str(note);
                message.push('\n');
            }
        }
        (Command::Sweep, Some(ctx)) => {
            let out = sweep::sweep(ctx)?;
            files.put("sweep.csv", &out.to_csv())?;
            let heatmap = ctx.config.sweep.as_ref().is_some_and(|s| s.heatmap);
            if heatmap && wants(Format::Svg) {
                files.put("sweep.svg", &out.to_svg())?;
            }
            message = format!("{} cell(s)\n", out.cells.len());
        }
        (Command::VerifyPaper, _) => {
            let report = verify::verify();
            message = report.to_text();
            files.put("verify.txt", &message)?;
            files.put("verify.json", &json(&report))?;
            if !report.passed() {
                exit_code = 3;
            }
        }
        _ => unreachable!("config loaded for every command that needs one"),
    }
    Ok(Outcome { message, files: files.written, exit_code })
}
