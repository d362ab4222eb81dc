//! Benchmark CLI: run sweep specs or built-in presets and write CSV.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use chanest::bench::{csv_string, list_presets, load_spec, preset, run_sweep, SweepSpec};
use chanest::{Error, Result};

/// Environment variable selecting the worker-thread count (default: all
/// cores).
const THREADS_ENV: &str = "CHANEST_THREADS";

#[derive(Parser)]
#[command(
    name = "chanest",
    version,
    about = "Channel-estimator benchmark sweeps over data SNR",
    after_help = "Set CHANEST_THREADS to pin the worker-thread count. \
                  Results are identical for every thread count."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a TOML spec file and write CSV
    Run {
        /// Path to the sweep spec (TOML)
        #[arg(long)]
        spec: PathBuf,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
        /// Override the Monte Carlo base seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the Monte Carlo trial count per sweep point
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Run a built-in preset and write CSV
    Preset {
        /// Preset name (see `presets`)
        name: String,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
        /// Override the Monte Carlo base seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the Monte Carlo trial count per sweep point
        #[arg(long)]
        trials: Option<u64>,
    },
    /// List the built-in presets
    Presets,
}

fn init_threads() -> Result<()> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(std::env::VarError::NotUnicode(_)) => Err(Error::Config(format!(
            "{THREADS_ENV}: value is not valid unicode"
        ))),
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                Error::Config(format!(
                    "{THREADS_ENV}: expected a positive integer, got `{raw}`"
                ))
            })?;
            if n == 0 {
                return Err(Error::Config(format!(
                    "{THREADS_ENV}: thread count must be >= 1"
                )));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Config(format!("{THREADS_ENV}: {e}")))
        }
    }
}

fn execute_sweep(
    mut spec: SweepSpec,
    out: &PathBuf,
    seed: Option<u64>,
    trials: Option<u64>,
) -> Result<()> {
    spec.override_mc(seed, trials)?;
    let rows = run_sweep(&spec)?;
    std::fs::write(out, csv_string(&rows))?;
    println!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

fn real_main() -> Result<()> {
    let cli = Cli::parse();
    init_threads()?;
    match cli.command {
        Command::Run { spec, out, seed, trials } => {
            let spec = load_spec(&spec)?;
            execute_sweep(spec, &out, seed, trials)
        }
        Command::Preset { name, out, seed, trials } => {
            let spec = preset(&name)?;
            execute_sweep(spec, &out, seed, trials)
        }
        Command::Presets => {
            for p in list_presets() {
                println!("{:<6} {}", p.name, p.description);
            }
            Ok(())
        }
    }
}

fn main() {
    if let Err(e) = real_main() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
