use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qtwm_cli::{load, run, HarnessError, RunOptions};

#[derive(Parser)]
#[command(name = "qtwm", version, about = "Pulsed three-wave mixing in realistic waveguides")]
struct Cli {
    /// Worker threads for sweeps and scans (0 = all cores).
    #[arg(long, global = true, env = "QTWM_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Also write PNG plots.
    #[arg(long, global = true)]
    emit_plots: bool,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one scenario and write its results.
    Simulate { config: PathBuf },
    /// Repeat a scenario over values of one parameter.
    Sweep {
        config: PathBuf,
        /// Dotted config key, or `combined` for the joint preset.
        #[arg(long)]
        param: String,
        /// Comma-separated values; the config preset when omitted.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Repetitions per value, each with its own derived seed.
        #[arg(long, default_value_t = 1)]
        seeds: usize,
    },
    /// Self-phase-modulation overlap and state metrics versus pump photons.
    SpmScan {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        pump_photons: Vec<f64>,
    },
}

fn execute(cli: Cli) -> Result<serde_json::Value, HarnessError> {
    let options = RunOptions { out: cli.out, workers: cli.workers, emit_plots: cli.emit_plots };
    match cli.command {
        Command::Simulate { config } => {
            let loaded = load(&config)?;
            let report = run::simulate(&loaded, &options)?;
            Ok(serde_json::json!({
                "command": "simulate",
                "dir": report.dir,
                "seed": report.seed,
                "files": report.files,
            }))
        }
        Command::Sweep { config, param, values, seeds } => {
            let loaded = load(&config)?;
            let report = run::sweep(&loaded, &param, values.as_deref(), seeds, &options)?;
            Ok(serde_json::json!({
                "command": "sweep",
                "file": report.path,
                "runs": report.rows.len(),
                "aggregates": report.aggregates.len(),
            }))
        }
        Command::SpmScan { config, pump_photons } => {
            let loaded = load(&config)?;
            let report = run::spm_scan(&loaded, &pump_photons, &options)?;
            Ok(serde_json::json!({ "command": "spm-scan", "file": report.path, "points": report.rows.len() }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
