//! Batch command-line surface: descriptor-space generation, full selection
//! runs, simulation suites, the train/test RMSE protocol, and single
//! screening passes.
//!
//! Exit codes: 0 success, 65 validation (bad data, config, descriptor
//! grammar), 70 numerical failure (fits, budgets, no-signal aborts),
//! 74 IO failure, 2 command-line usage (from the parser).

mod commands;
mod manifest;

use clap::{Parser, Subcommand};
use ibart_core::error::Error as CoreError;
use std::process::ExitCode;

pub const EXIT_VALIDATION: u8 = 65;
pub const EXIT_NUMERICAL: u8 = 70;
pub const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(name = "ibart", version, about = "Iterative descriptor construction and selection")]
struct Cli {
    /// Master seed; every random stream derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for permutation fits and replicates (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Sampler profile: `paper` (10k/5k draws) or `desk` (1k/1k).
    #[arg(long, global = true, default_value = "desk")]
    profile: Profile,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Profile {
    Paper,
    Desk,
}

impl Profile {
    fn bart(self) -> ibart_core::bart::BartConfig {
        match self {
            Profile::Paper => ibart_core::bart::BartConfig::default(),
            Profile::Desk => ibart_core::bart::BartConfig::desk(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a descriptor space from a primary-data CSV.
    Generate(commands::generate::GenerateArgs),
    /// Run the full iterative selection loop.
    Select(commands::select::SelectArgs),
    /// Run simulation suites from a JSON definition.
    Simulate(commands::simulate::SimulateArgs),
    /// Random-split train/test RMSE protocol on a dataset.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// One screening pass: inclusion proportions and the permutation threshold.
    BartSelect(commands::bart_select::BartSelectArgs),
}

pub struct Ctx {
    pub seed: u64,
    pub profile_bart: ibart_core::bart::BartConfig,
    pub started: std::time::Instant,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    let ctx = Ctx {
        seed: cli.seed,
        profile_bart: cli.profile.bart().with_seed(cli.seed),
        started: std::time::Instant::now(),
    };
    let result = match cli.command {
        Command::Generate(args) => commands::generate::run(&ctx, args),
        Command::Select(args) => commands::select::run(&ctx, args),
        Command::Simulate(args) => commands::simulate::run(&ctx, args),
        Command::Evaluate(args) => commands::evaluate::run(&ctx, args),
        Command::BartSelect(args) => commands::bart_select::run(&ctx, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

/// Maps error chains onto the documented exit codes.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::Io { .. } => EXIT_IO,
                CoreError::Parse { .. }
                | CoreError::Invalid(_)
                | CoreError::UnknownLeaf { .. }
                | CoreError::EmptyInput(_)
                | CoreError::NonFinite(_) => EXIT_VALIDATION,
                CoreError::DomainViolation { .. }
                | CoreError::TooFewDescriptors(_)
                | CoreError::TooFewObservations { .. }
                | CoreError::BudgetExceeded { .. }
                | CoreError::NoSignal => EXIT_NUMERICAL,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return EXIT_VALIDATION;
        }
    }
    EXIT_NUMERICAL
}
