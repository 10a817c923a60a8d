//! Command-line entry point.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on numerical
//! failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use beamslider_lab::config::{self, RunConfig};
use beamslider_lab::error::LabError;
use beamslider_lab::workflows;

#[derive(Parser)]
#[command(
    name = "beamslider",
    about = "Beam-slider dynamics laboratory: amplitude branches, non-smooth \
             contact simulation, and slider-locomotion analysis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to a JSON configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Name of a shipped preset (table-default, case1, case2, case3).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory for CSV and JSON files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Dotted-path overrides, e.g. --override sim.duration_s=2.5
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Analytical amplitude branches over the slider position.
    Ssim(CommonArgs),
    /// Time-domain contact simulation with the analysis post-pass.
    Simulate(CommonArgs),
    /// Numerical amplitude map by stepwise position continuation.
    PcsSweep(CommonArgs),
    /// Closed-form locomotion report for the reference cases.
    LocomotionReport(CommonArgs),
    /// Long free-slider run reproducing the signature move.
    SignatureMove(CommonArgs),
}

fn config_from(args: &CommonArgs) -> Result<RunConfig, LabError> {
    let text = match (&args.config, &args.preset) {
        (Some(path), None) => std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?,
        (None, Some(name)) => config::preset(name)?.to_string(),
        (None, None) => config::preset("table-default")?.to_string(),
        (Some(_), Some(_)) => unreachable!("clap forbids both"),
    };
    RunConfig::from_json_with_overrides(&text, &args.overrides)
}

fn run() -> Result<(), LabError> {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Ssim(a) => ("ssim", a),
        Command::Simulate(a) => ("simulate", a),
        Command::PcsSweep(a) => ("pcs-sweep", a),
        Command::LocomotionReport(a) => ("locomotion-report", a),
        Command::SignatureMove(a) => ("signature-move", a),
    };
    let config = config_from(args)?;
    let summary = workflows::run_workflow(name, &config, &args.out)?;
    println!("{}", serde_json::to_string_pretty(&summary).unwrap());
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
