use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fredholm_bench::{execute, write_csv, ExperimentConfig, run_experiment};

#[derive(Parser)]
#[command(name = "fredholm", version, about = "Run first-kind solver benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every method of a config at every noise level.
    Solve {
        config: PathBuf,
        /// Directory for results.csv; without it the table goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let Command::Solve { config, out, jobs, seed } = Cli::parse().command;
    let mut cfg = match ExperimentConfig::load(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let result = match out.or_else(|| cfg.output.clone()) {
        Some(dir) => execute(&cfg, &dir, jobs),
        None => run_experiment(&cfg, jobs).and_then(|exp| {
            write_csv(&exp.records, std::io::stdout().lock())
                .map_err(|e| fredholm_bench::BenchError::Io {
                    path: "<stdout>".into(),
                    message: e.to_string(),
                })
                .map(|_| exp)
        }),
    };
    match result {
        Ok(exp) if exp.all_converged() => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
