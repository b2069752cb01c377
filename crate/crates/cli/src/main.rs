//! `myotune` command-line pipeline: synthesize recordings, extract features,
//! tune per-subject classifiers and summarize runs.

mod extract;
mod manifest;
mod report;
mod synth;
mod tune;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use myotune::config::ConfigError;
use myotune::tuner::ObjectiveSet;

#[derive(Parser)]
#[command(name = "myotune", version, about = "Multi-objective SVM tuning for sEMG gesture recognition")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic corpus.
    Synth {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Segment a recording manifest and write the feature table.
    Extract {
        manifest: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tune one model per subject found in a feature table.
    Tune {
        features: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config file's `seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = parse_objective_set)]
        objective_set: Option<ObjectiveSet>,
        /// Draw TS2 from every trial, including those used for training.
        #[arg(long)]
        ts2_allow_train_windows: bool,
        /// Only tune this subject.
        #[arg(long)]
        subject: Option<u32>,
    },
    /// Average extreme-solution metrics over run directories.
    Report {
        #[arg(required = true)]
        run_dirs: Vec<PathBuf>,
        /// Summary CSV; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Pool runs with different seeds.
        #[arg(long)]
        force: bool,
    },
}

fn parse_objective_set(s: &str) -> Result<ObjectiveSet, String> {
    s.parse()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global()?;
    }
    match cli.command {
        Command::Synth { config, seed, out } => synth::run(config.as_deref(), seed, &out),
        Command::Extract { manifest, config, out } => extract::run(&manifest, config.as_deref(), &out),
        Command::Tune { features, config, seed, out, objective_set, ts2_allow_train_windows, subject } => {
            let overrides = tune::Overrides { seed, objective_set, ts2_allow_train_windows, subject };
            tune::run(&features, config.as_deref(), &overrides, &out)
        }
        Command::Report { run_dirs, out, force } => report::run(&run_dirs, out.as_deref(), force),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.chain().any(|e| e.is::<ConfigError>()) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
