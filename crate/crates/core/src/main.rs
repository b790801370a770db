use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cdpr::cli::{plot_command, run_command, schema_reference, CliError, PlotKind, RunOptions};

/// Reconfigurable cable robot simulator with failure identification and
/// task recovery.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write log.csv and header.json.
    Run {
        /// Scenario JSON file, or a header.json from an earlier run.
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Simulated time in seconds.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Render SVG plots from a run log.
    Plot {
        log: PathBuf,
        /// Plot kinds; all of them when omitted.
        #[arg(long, value_enum)]
        kind: Vec<PlotKind>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the scenario file reference with defaults.
    Schema,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            duration,
        } => {
            let opts = RunOptions {
                seed,
                duration,
                threads: None,
            };
            let art = run_command(&scenario, &out, &opts)?;
            println!("wrote {} rows to {}", art.rows, art.log.display());
            println!("wrote {}", art.header.display());
        }
        Command::Plot { log, kind, out } => {
            let kinds = if kind.is_empty() { PlotKind::ALL.to_vec() } else { kind };
            for path in plot_command(&log, &kinds, &out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Schema => print!("{}", schema_reference()),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
