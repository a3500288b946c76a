//! `qualifit` command-line driver: generate → sample → analyze, plus fit and check.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{cmd_analyze, cmd_check, cmd_fit, cmd_generate, cmd_sample, default_config};
use config::RunConfig;
use error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "qualifit",
    version,
    about = "Bayesian parameter estimation from qualitative and quantitative data"
)]
struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Overrides the configured output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Number of replicate runs; run k uses seed + k.
    #[arg(long, global = true, value_name = "K")]
    runs: Option<usize>,

    /// Sampler worker threads (results do not depend on this).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset from the biphasic model.
    Generate,
    /// Draw posterior samples by parallel tempering.
    Sample,
    /// Find a point estimate by annealing.
    Fit,
    /// Summarize sample files (default: every run in the output directory).
    Analyze {
        files: Vec<PathBuf>,
        /// Compare interval widths across datasets; repeatable.
        #[arg(long, value_name = "LABEL=FILE[,FILE...]")]
        compare: Vec<String>,
        /// Credible level of the equal-tailed intervals.
        #[arg(long)]
        level: Option<f64>,
        /// Histogram bins.
        #[arg(long)]
        bins: Option<usize>,
        /// Columns to summarize on a log10 scale: `all` or a comma-separated list.
        #[arg(long, value_name = "NAMES")]
        log10: Option<String>,
    },
    /// Validate a constraint file.
    Check {
        file: PathBuf,
        /// Treat category-family warnings as errors.
        #[arg(long)]
        strict: bool,
    },
}

fn load(cli: &Cli, required: bool) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None if required => return Err(CliError::config("this command needs --config PATH")),
        None => default_config(None),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(runs) = cli.runs {
        cfg.runs = runs;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if cfg.runs == 0 {
        return Err(CliError::config("runs must be at least 1"));
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Generate => cmd_generate(&load(cli, true)?),
        Command::Sample => cmd_sample(&load(cli, true)?),
        Command::Fit => cmd_fit(&load(cli, true)?),
        Command::Analyze {
            files,
            compare,
            level,
            bins,
            log10,
        } => {
            let mut cfg = load(cli, false)?;
            if let Some(l) = level {
                cfg.level = *l;
            }
            if let Some(b) = bins {
                cfg.bins = *b;
            }
            if let Some(spec) = log10 {
                let text = format!("[analyze]\nlog10 = {spec}\n");
                cfg.log10 = RunConfig::from_text(&text, std::path::Path::new("."))?.log10;
            }
            cmd_analyze(&cfg, files, compare)
        }
        Command::Check { file, strict } => cmd_check(file, *strict),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(CliError::CONFIG as u8),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(report) => {
            print!("{report}");
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
