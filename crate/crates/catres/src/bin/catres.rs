//! `catres <two-phonon|cat|robustness|sweep> --config <path> [--set k=v ...] --out <dir>`
//!
//! Exit codes: 0 success, 2 configuration/validation failure, 3 numerical
//! tolerance failure. `CATRES_THREADS` caps the worker pool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use catres::experiment::{run_experiment, ExperimentConfig, ExperimentError};

#[derive(Parser)]
#[command(name = "catres", version, about = "Multimode optomechanics simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-phonon generation: coupled-mode vs effective dynamics.
    #[command(name = "two-phonon")]
    TwoPhonon(RunArgs),
    /// Multicomponent mechanical cat-state generation.
    Cat(RunArgs),
    /// Thermal-noise and optical-loss robustness sweeps.
    Robustness(RunArgs),
    /// Free-form parameter sweep around a base experiment.
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override a config leaf by dotted path, e.g. --set delta_hz=2.5e6.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    if let Ok(raw) = std::env::var("CATRES_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: CATRES_THREADS must be a positive integer, got `{raw}`");
                return ExitCode::from(2);
            }
        }
    }

    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::TwoPhonon(a) => ("two-phonon", a),
        Command::Cat(a) => ("cat", a),
        Command::Robustness(a) => ("robustness", a),
        Command::Sweep(a) => ("sweep", a),
    };

    match execute(name, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(name: &str, args: &RunArgs) -> Result<(), ExperimentError> {
    let json = std::fs::read_to_string(&args.config).map_err(|e| {
        ExperimentError::Config(format!("cannot read {}: {e}", args.config.display()))
    })?;
    let cfg = ExperimentConfig::load(&json, Some(name), &args.set)?;
    let summary = run_experiment(&cfg, &args.out)?;
    println!("{name}: ok ({})", args.out.display());
    for (k, v) in &summary {
        println!("  {k} = {v:.9e}");
    }
    Ok(())
}
