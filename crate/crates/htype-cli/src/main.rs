use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use htype_cli::{run_file, ExperimentKind, RunError};

#[derive(Parser)]
#[command(name = "htype-lab", about = "Truncated H-type group experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file.
    Run {
        /// Path to the config file.
        config: PathBuf,
        /// Output directory for CSV and summary files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List available experiments.
    ListExperiments,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out, seed } => match run_file(&config, &out, seed) {
            Ok(summary) => {
                println!("experiment: {}", summary.experiment);
                println!("csv:        {}", summary.csv_path.display());
                println!("summary:    {}", summary.summary_path.display());
                if summary.passed {
                    println!("result:     pass");
                    ExitCode::SUCCESS
                } else {
                    for name in &summary.failed_assertions {
                        eprintln!("failed assertion: {name}");
                    }
                    println!("result:     fail");
                    ExitCode::from(1)
                }
            }
            Err(err @ RunError::Config(_)) | Err(err @ RunError::Io(_)) => {
                eprintln!("{err}");
                ExitCode::from(2)
            }
        },
        Command::ListExperiments => {
            for kind in ExperimentKind::ALL {
                println!("{:<12} {}", kind.name(), kind.describe());
            }
            ExitCode::SUCCESS
        }
    }
}
