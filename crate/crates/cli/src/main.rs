use std::path::PathBuf;
use std::process::exit;

use clap::Parser;
use specgap::config::Experiment;
use specgap::run::{run, Invocation, EXIT_INVALID};

#[derive(Parser)]
#[command(name = "specgap", version, about = "Spectral-gap experiments for magnetic Schrödinger operators")]
struct Cli {
    experiment: Experiment,
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; SPECGAP_JOBS takes precedence.
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    let jobs = match std::env::var("SPECGAP_JOBS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => {
                eprintln!("SPECGAP_JOBS: expected a positive integer, got {v:?}");
                exit(EXIT_INVALID);
            }
        },
        Err(_) => cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
    };
    exit(run(&Invocation { experiment: cli.experiment, config: cli.config, out: cli.out, jobs }));
}
