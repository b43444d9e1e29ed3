//! `pacint` — run seeded prediction-interval experiments, calibrate a
//! width multiplier from a records file, or recompute report aggregates.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use pacint_core::{calibrate, read_records_csv, PacTarget};
use pacint_harness::config::ExperimentConfig;
use pacint_harness::error::HarnessError;
use pacint_harness::report::{aggregate, read_rows, run_suite, write_report};
use pacint_harness::trial::PredictorMode;

#[derive(Parser)]
#[command(
    name = "pacint",
    version,
    about = "PAC prediction-interval experiment driver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured trial suite and write rows.csv + aggregates.json.
    Run {
        /// Experiment config file (flat key=value format).
        #[arg(long)]
        config: PathBuf,
        /// Output directory; created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for trial execution (default: serial).
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Calibrate a width multiplier from a records CSV (columns mu,sigma,y)
    /// and print the result as JSON.
    Calibrate {
        #[arg(long)]
        records: PathBuf,
        /// Miscoverage target in (0, 1).
        #[arg(long)]
        epsilon: f64,
        /// Confidence budget in (0, 1).
        #[arg(long)]
        delta: f64,
    },
    /// Recompute aggregates from an existing rows CSV.
    Report {
        #[arg(long)]
        rows: PathBuf,
        /// Destination file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(u8::try_from(e.exit_code()).expect("exit codes are 1..=3"))
        }
    }
}

fn dispatch(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run {
            config,
            out,
            parallel,
        } => {
            let text = std::fs::read_to_string(&config)?;
            let config = ExperimentConfig::parse(&text)?;
            let results = run_suite(&config, PredictorMode::Trained, parallel)?;
            let failure = write_report(&out, &config, &results)?;
            match failure {
                None => Ok(()),
                Some((seed, message)) => Err(HarnessError::Trial { seed, message }),
            }
        }
        Command::Calibrate {
            records,
            epsilon,
            delta,
        } => {
            let file = File::open(&records)?;
            let records = read_records_csv(BufReader::new(file))
                .map_err(|e| HarnessError::Usage(e.to_string()))?;
            let target =
                PacTarget::new(epsilon, delta).map_err(|e| HarnessError::Usage(e.to_string()))?;
            let result =
                calibrate(&records, target).map_err(|e| HarnessError::Usage(e.to_string()))?;
            let json = serde_json::to_string_pretty(&result)
                .map_err(|e| HarnessError::Usage(e.to_string()))?;
            println!("{json}");
            Ok(())
        }
        Command::Report { rows, out } => {
            let file = File::open(&rows)?;
            let rows = read_rows(BufReader::new(file))?;
            let aggregates = aggregate(&rows, None);
            let json = serde_json::to_string_pretty(&aggregates)
                .map_err(|e| HarnessError::Usage(e.to_string()))?;
            match out {
                Some(path) => std::fs::write(path, json + "\n")?,
                None => println!("{json}"),
            }
            Ok(())
        }
    }
}
