mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nidt::config::RunConfig;
use nidt::model::Family;

use error::CliError;

#[derive(Parser)]
#[command(name = "nidt", version, about = "Flow-based intrusion detection: train, transfer and evaluate")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Key-value config file; its values override the defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one config key (repeatable); wins over the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Worker threads (0 = all cores); wins over the `threads` config key.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Load flow CSVs, split them into train/val/test, and fit the encoding.
    Prepare {
        #[arg(long, required = true, num_args = 1.., value_name = "CSV")]
        input: Vec<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Rank features with an extra-trees ensemble.
    Importance {
        #[arg(long, value_name = "CSV")]
        train: PathBuf,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Train a model on a prepared data directory.
    Train {
        #[arg(long, default_value = "cnn-lstm")]
        family: Family,
        #[arg(long, value_name = "DIR")]
        data: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Verify a trained model directory and write its bundle.
    Export {
        #[arg(long, value_name = "DIR")]
        model: PathBuf,
        #[arg(long, value_name = "BUNDLE")]
        out: PathBuf,
    },
    /// Score raw flow rows with a bundle.
    Infer {
        #[arg(long, value_name = "BUNDLE")]
        bundle: PathBuf,
        #[arg(long, value_name = "CSV")]
        input: PathBuf,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Score labeled rows and write metrics, ROC points and the confusion grid.
    Evaluate {
        #[arg(long, value_name = "BUNDLE")]
        bundle: PathBuf,
        #[arg(long, value_name = "CSV")]
        input: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Time a full scoring pass at a fixed thread count.
    Benchmark {
        #[arg(long, value_name = "BUNDLE")]
        bundle: PathBuf,
        #[arg(long, value_name = "CSV")]
        input: PathBuf,
        /// Append the result to this CSV log.
        #[arg(long, value_name = "CSV")]
        log: Option<PathBuf>,
        /// Model label for the log (default: the bundle's family).
        #[arg(long)]
        name: Option<String>,
        /// Domain label for the log.
        #[arg(long, default_value = "target")]
        domain: String,
    },
}

fn load_config(g: &Global) -> Result<RunConfig, CliError> {
    let mut config = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for pair in &g.sets {
        config.set_pair(pair)?;
    }
    if let Some(t) = g.threads {
        config.threads = t;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(&cli.global)?;
    match cli.command {
        Command::Prepare { input, out } => commands::prepare(&config, &input, &out),
        Command::Importance { train, out } => commands::importance(&config, &train, &out),
        Command::Train { family, data, out } => commands::train(&config, family, &data, &out),
        Command::Export { model, out } => commands::export(&model, &out),
        Command::Infer { bundle, input, out } => commands::infer(&config, &bundle, &input, &out),
        Command::Evaluate { bundle, input, out } => commands::evaluate(&config, &bundle, &input, &out),
        Command::Benchmark { bundle, input, log, name, domain } => {
            commands::benchmark(&config, &bundle, &input, log.as_deref(), name, &domain)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_string();
            let err = CliError::usage(first);
            eprintln!("{err}");
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
