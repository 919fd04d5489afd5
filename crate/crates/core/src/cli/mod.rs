//! Command-line experiment runner.
//!
//! Every experiment is described by a TOML file (see [`config`]). Tasks are
//! seeded from the master seed and a task path, so results do not depend on
//! the number of worker threads.

pub mod config;
pub mod experiments;
pub mod run;
pub mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::error::Error;
pub use config::{Experiment, ExperimentConfig, OutputFormat};
pub use run::{run, write_outputs, RunOutput};
pub use table::Table;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_ABORTED: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "hdgen", version, about = "Run heavy-tailed trajectory experiments")]
pub struct Args {
    /// Experiment description (TOML).
    #[arg(long, required_unless_present = "example")]
    pub config: Option<PathBuf>,
    /// Overrides the master seed from the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the output directory from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides the output format from the config.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Print an example config for the given experiment kind and exit.
    #[arg(long, value_name = "KIND", conflicts_with = "config")]
    pub example: Option<String>,
}

fn resolve(args: &Args) -> Result<ExperimentConfig, Error> {
    let path = args.config.as_ref().expect("clap enforces --config");
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.out = out.clone();
    }
    if let Some(format) = args.format {
        config.format = format;
    }
    Ok(config)
}

fn is_validation(e: &Error) -> bool {
    matches!(
        e,
        Error::Config { .. } | Error::InvalidParameter { .. } | Error::DimensionMismatch { .. }
    )
}

/// Runs the CLI and maps the outcome onto the documented exit codes.
pub fn main_with(args: Args) -> ExitCode {
    if let Some(kind) = &args.example {
        return match config::example(kind) {
            Some(text) => {
                print!("{text}");
                ExitCode::from(EXIT_OK)
            }
            None => {
                eprintln!("error: unknown experiment kind `{kind}`");
                ExitCode::from(EXIT_INVALID)
            }
        };
    }
    let config = match resolve(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    if let Some(k) = args.threads {
        if k == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_INVALID);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }

    let output = match run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if is_validation(&e) { EXIT_INVALID } else { EXIT_ABORTED });
        }
    };
    if let Err(e) = write_outputs(&config, &output, &config.out) {
        eprintln!("error: writing results: {e}");
        return ExitCode::from(EXIT_ABORTED);
    }
    for line in &output.report {
        println!("{line}");
    }
    if output.partial {
        eprintln!("time budget exhausted; results in {} are partial", config.out.display());
        return ExitCode::from(EXIT_ABORTED);
    }
    ExitCode::from(EXIT_OK)
}
