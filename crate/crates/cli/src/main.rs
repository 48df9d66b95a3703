//! Batch command-line front door: simulate scenes, generate questions,
//! answer them, evaluate accuracy, calibrate thresholds, and export the
//! collision-analysis tables.
//!
//! Exit codes: 0 success, 1 input error, 2 internal invariant violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use commands::CliError;

#[derive(Parser)]
#[command(name = "seer", version, about = "Spatio-temporal event reasoner over object traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ReasonerFlags {
    /// Thresholds file (key = value lines).
    #[arg(long)]
    thresholds: Option<PathBuf>,
    /// Event-detection variant.
    #[arg(long, default_value = "H2")]
    variant: String,
    /// Reason in 2 or 3 dimensions (3D traces project down for 2).
    #[arg(long)]
    dims: Option<u8>,
    /// Keep every n-th frame before reasoning (default 1: every frame).
    #[arg(long, default_value_t = 1)]
    stride: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate scenes from a generator spec (or a single scripted scene),
    /// writing trace and ground-truth files.
    Simulate {
        /// Generator spec JSON, or `{"scene": <config>}` for one scripted
        /// scene.
        #[arg(long)]
        config: PathBuf,
        /// Number of scenes to draw.
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Base seed; scene i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Overwrite existing files.
        #[arg(long)]
        force: bool,
        /// Worker threads (scene-level parallelism).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Generate questions and oracle answers for simulated scenes.
    Genq {
        /// Directory of `*.truth.json` files.
        #[arg(long)]
        scenes: PathBuf,
        /// Descriptive questions per scene.
        #[arg(long, default_value_t = 44)]
        descriptive: usize,
        /// Explanatory questions per scene.
        #[arg(long, default_value_t = 8)]
        explanatory: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        force: bool,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Answer a questions file against one trace.
    Answer {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        questions: PathBuf,
        #[command(flatten)]
        reasoner: ReasonerFlags,
        /// Ground-truth sidecar (enables predictive/counterfactual
        /// questions).
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Observed frames for predictive questions (default: all).
        #[arg(long)]
        observed: Option<usize>,
        /// Answers output file.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Compare an answers file against oracle answers.
    Eval {
        #[arg(long)]
        answers: PathBuf,
        #[arg(long)]
        oracle: PathBuf,
        /// Questions file (adds per-type accuracy to the report).
        #[arg(long)]
        questions: Option<PathBuf>,
    },
    /// Grid-search thresholds against QA accuracy over prepared scenes.
    Calibrate {
        /// Directory of `*.trace.json` + `*.questions.txt` + `*.oracle.tsv`.
        #[arg(long)]
        scenes: PathBuf,
        /// Grid JSON; omit for the default 4x4x4x4 grid.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value = "H2")]
        variant: String,
        #[arg(long)]
        dims: Option<u8>,
        /// Winning thresholds file.
        #[arg(long)]
        out: PathBuf,
        /// Full accuracy table CSV.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        force: bool,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Export the collision-analysis tables (distances and velocity
    /// changes).
    Analyze {
        /// Directory of `*.trace.json` + `*.truth.json`.
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        force: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            config,
            count,
            seed,
            out,
            force,
            jobs,
        } => commands::simulate_cmd(&config, count, seed, &out, force, jobs),
        Command::Genq {
            scenes,
            descriptive,
            explanatory,
            seed,
            force,
            jobs,
        } => commands::genq(&scenes, descriptive, explanatory, seed, force, jobs),
        Command::Answer {
            trace,
            questions,
            reasoner,
            truth,
            observed,
            out,
            force,
        } => commands::answer(
            &trace,
            &questions,
            &reasoner.into_config(),
            truth.as_deref(),
            observed,
            &out,
            force,
        ),
        Command::Eval {
            answers,
            oracle,
            questions,
        } => commands::eval(&answers, &oracle, questions.as_deref()),
        Command::Calibrate {
            scenes,
            grid,
            variant,
            dims,
            out,
            table,
            force,
            jobs,
        } => commands::calibrate(
            &scenes,
            grid.as_deref(),
            &variant,
            dims,
            &out,
            table.as_deref(),
            force,
            jobs,
        ),
        Command::Analyze {
            scenes,
            out_dir,
            force,
        } => commands::analyze(&scenes, &out_dir, force),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

impl ReasonerFlags {
    fn into_config(self) -> commands::ReasonerSetup {
        commands::ReasonerSetup {
            thresholds: self.thresholds,
            variant: self.variant,
            dims: self.dims,
            stride: self.stride,
        }
    }
}

/// Refuse to clobber existing outputs unless forced.
pub(crate) fn guard_overwrite(path: &Path, force: bool) -> Result<(), CliError> {
    if path.exists() && !force {
        return Err(CliError::Input(format!(
            "{} exists; pass --force to overwrite",
            path.display()
        )));
    }
    Ok(())
}
