use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hhalf_cli::{cmd_diagnose, cmd_experiment, cmd_run, EXIT_ERROR};

#[derive(Parser)]
#[command(name = "hhalf", version, about = "Spectral Navier-Stokes runs, regularity diagnostics and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve from a key=value configuration
    Run { config: PathBuf },
    /// Cylinder sweep over a stored trajectory
    Diagnose {
        trajectory_dir: PathBuf,
        /// Sweep or single-cylinder configuration
        config: Option<PathBuf>,
    },
    /// One of: scaling, weak_convergence, bisection, calderon, decay
    Experiment { kind: String, config: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { 0 });
        }
    };
    let res = match &cli.command {
        Command::Run { config } => cmd_run(config),
        Command::Diagnose { trajectory_dir, config } => cmd_diagnose(trajectory_dir, config.as_deref()),
        Command::Experiment { kind, config } => cmd_experiment(kind, config),
    };
    match res {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
