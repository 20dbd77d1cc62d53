//! `epiaug` command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

mod commands;
mod compare;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{AugmentArgs, CompareArgs, EvaluateArgs, RankArgs, SplitArgs, TtestArgs};

#[derive(Debug, Parser)]
#[command(name = "epiaug", version, about = "Mask-aware augmentation and segmentation evaluation")]
struct Cli {
    /// Worker threads for per-pair work; outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Augment image/mask pairs with one interpolation configuration.
    Augment(AugmentArgs),
    /// Score predicted masks against ground truth.
    Evaluate(EvaluateArgs),
    /// Rank methods per group and sum the ranks.
    Rank(RankArgs),
    /// Two-sample t-test between two methods' ranks, per metric.
    Ttest(TtestArgs),
    /// Assign train/val/test splits to a dataset.
    Split(SplitArgs),
    /// Side-by-side composite: image | ground truth | mask A | mask B.
    Compare(CompareArgs),
    /// Re-run a command from its persisted `.run.json`.
    Replay {
        #[arg(long)]
        run: std::path::PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.workers > 0 {
        // Only fails if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global();
    }
    let result = match cli.command {
        Command::Augment(a) => commands::augment(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Rank(a) => commands::rank(&a),
        Command::Ttest(a) => commands::ttest(&a),
        Command::Split(a) => commands::split(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Replay { run } => commands::replay(&run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<commands::UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
