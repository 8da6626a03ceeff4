use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use sam::checkpoint::Checkpoint;
use sam::{checks, eval, plot, train, ExperimentConfig};

#[derive(Parser)]
#[command(name = "sam", version, about = "Shaping-advice multi-agent actor-critic experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every seed of a config and write metrics, checkpoints and a summary.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Train only this seed instead of the configured list.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Play a checkpoint with mean actions and print score statistics.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        episodes: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render score curves from a directory of metrics files.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the gradient, telescoping, oracle, fixed-point and IRCR suites.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Train { config, seed_override } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(seed) = seed_override {
                cfg.seeds = vec![seed];
            }
            let (results, summary) = train::train(&cfg)?;
            for r in &results {
                match &r.failure {
                    None => println!("seed {}: {} episodes -> {}", r.seed, r.scores.len(), r.metrics_path.display()),
                    Some(msg) => println!("seed {}: FAILED {msg}", r.seed),
                }
            }
            println!(
                "{} {}: final-window score {:.4} +- {:.4} over {} seeds",
                cfg.task.short_name(),
                cfg.method.name(),
                summary.mean,
                summary.std,
                summary.per_seed.len()
            );
            if results.iter().any(|r| r.failure.is_some()) {
                anyhow::bail!("one or more seeds failed");
            }
            Ok(true)
        }
        Command::Eval {
            checkpoint,
            episodes,
            seed,
        } => {
            let ckpt = Checkpoint::load(&checkpoint)?;
            let s = eval::evaluate(&ckpt, episodes, seed)?;
            println!(
                "episodes {} mean {:.4} std {:.4} min {:.4} max {:.4}",
                s.episodes, s.mean, s.std, s.min, s.max
            );
            Ok(true)
        }
        Command::Plot { input, out } => {
            for p in plot::plot_dir(&input, &out).context("plot failed")? {
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
        Command::Verify { seed } => {
            let outcomes = checks::all(seed);
            for o in &outcomes {
                println!("{}", o.line());
            }
            Ok(outcomes.iter().all(|o| o.pass))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
