//! `motionkit` command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 data error,
//! 3 training error. `MOTIONKIT_LOG` sets the log filter (default `warn`).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use motionkit_core::{ClassifierKind, Error, ErrorCategory, MovementKind};

#[derive(Debug, Parser)]
#[command(name = "motionkit", version, about = "Young/older classification from skeleton recordings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cross-validate every configured movement and classifier and write reports.
    Run(RunArgs),
    /// Write a synthetic cohort of JSON recordings.
    Synth(SynthArgs),
    /// Dump per-frame features of one recording as CSV.
    Encode(EncodeArgs),
    /// Build motion vectors from recordings and write them as CSV.
    Represent(RepresentArgs),
    /// Train one classifier on a motion-vector CSV and save it as JSON.
    Train(TrainArgs),
    /// Classify one recording with a saved model.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML pipeline configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `data_dir`.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Overrides `output_dir`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `standardize_features`.
    #[arg(long)]
    standardize_features: Option<bool>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 54)]
    subjects: usize,
    #[arg(long)]
    seed: u64,
    /// Number of young subjects; the default keeps a 26:54 share.
    #[arg(long)]
    young: Option<usize>,
    /// Restrict to these movements (repeatable).
    #[arg(long = "movement")]
    movements: Vec<MovementKind>,
    /// Seconds per stand or balance recording.
    #[arg(long, default_value_t = 10.0)]
    duration: f64,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    /// Recording file (.json or .txt).
    #[arg(long)]
    input: PathBuf,
    /// Output CSV; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip first-frame normalization.
    #[arg(long)]
    raw: bool,
}

#[derive(Debug, Args)]
struct RepresentArgs {
    /// Recording files or directories of recordings.
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    /// Keep only recordings of this movement.
    #[arg(long)]
    movement: Option<MovementKind>,
    /// One centroid vector per recording instead of the near-centroid family.
    #[arg(long)]
    centroid: bool,
    #[arg(long)]
    standardize_features: bool,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Motion-vector CSV written by `represent`.
    #[arg(long)]
    vectors: PathBuf,
    #[arg(long)]
    classifier: ClassifierKind,
    #[arg(long)]
    seed: u64,
    /// TOML with optional `[svm]`, `[random_forest]` and `[deepnet]` tables.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Recording file (.json or .txt).
    #[arg(long)]
    input: PathBuf,
    /// Seed for clustering the recording.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn exit_code(e: &Error) -> u8 {
    match e.category() {
        ErrorCategory::Config => 1,
        ErrorCategory::Data => 2,
        ErrorCategory::Train => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MOTIONKIT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => commands::run(a),
        Command::Synth(a) => commands::synth(a),
        Command::Encode(a) => commands::encode(a),
        Command::Represent(a) => commands::represent(a),
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = match e.category() {
                ErrorCategory::Config => "ConfigError",
                ErrorCategory::Data => "DataError",
                ErrorCategory::Train => "TrainError",
            };
            eprintln!("motionkit: {kind}: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
