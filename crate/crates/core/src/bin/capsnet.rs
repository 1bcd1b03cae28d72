use std::path::PathBuf;
use std::process::ExitCode;

use capsnet::harness::{run_file, validate_file, Experiment, RunOptions};
use clap::{Parser, Subcommand};

/// Runs cavity-interconnect experiments described by TOML scenario files.
#[derive(Parser)]
#[command(name = "capsnet", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed overriding the scenario file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario and write its table.
    Run { config: PathBuf },
    /// Check a scenario without running it.
    Validate { config: PathBuf },
    /// List the available experiments.
    ListExperiments,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        workers: cli.workers,
        seed: cli.seed,
        out_dir: cli.out,
    };
    let code = match cli.command {
        Command::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<20} {}", e.name(), e.description());
            }
            0
        }
        Command::Validate { config } => match validate_file(&config) {
            Ok(report) => {
                print!("{report}");
                if report.is_valid() {
                    0
                } else {
                    2
                }
            }
            Err(e) => {
                eprintln!("{e}");
                e.exit_code()
            }
        },
        Command::Run { config } => match run_file(&config, &opts) {
            Ok(s) => {
                for w in &s.warnings {
                    eprintln!("warning: {w}");
                }
                println!(
                    "{} rows -> {} ({} failed)",
                    s.table.rows.len(),
                    s.csv_path.display(),
                    s.soft_failures + s.hard_failures
                );
                s.exit_code()
            }
            Err(e) => {
                eprintln!("{e}");
                e.exit_code()
            }
        },
    };
    ExitCode::from(code as u8)
}
