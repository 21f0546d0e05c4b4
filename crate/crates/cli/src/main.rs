//! `coexist`: run snapshot consistency experiments and check dumps.
//!
//! Exit codes: 0 success or consistent, 1 runtime failure, 2 usage error,
//! 3 inconsistent snapshot, 4 checker and oracle disagree.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coexist_core::harness::Clustering;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INCONSISTENT: u8 = 3;
pub const EXIT_DISAGREEMENT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "coexist",
    version,
    about = "Quasi-instantaneous consistency of memory snapshots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the deterministic simulator and write one experiment bundle.
    Simulate(SimulateArgs),
    /// Run the threaded pivot workload K times and write a bundle per run.
    Pivot(PivotArgs),
    /// Check a snapshot against a counter array.
    Check(CheckArgs),
    /// Summarize a directory of reports.
    Aggregate(AggregateArgs),
    /// Print spread metrics of a layout.
    Spread(SpreadArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub regions: u64,
    /// Events before the acquisition starts.
    #[arg(long, default_value_t = 100)]
    pub events: u64,
    /// Upper bound of random events injected before each copy.
    #[arg(long, default_value_t = 2)]
    pub max_between: u64,
    /// Events after the last copy.
    #[arg(long, default_value_t = 0)]
    pub trailing: u64,
    /// Acquisition plan (JSON with `order` and `events_between`).
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long, default_value = "packed", value_parser = parse_clustering)]
    pub clustering: Clustering,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct PivotArgs {
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
    /// Hold the workers off for the whole acquisition.
    #[arg(long)]
    pub frozen: bool,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub runs: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub regions: u64,
    /// Pause between two region copies, in microseconds.
    #[arg(long, default_value_t = 200)]
    pub copy_pause_us: u64,
    /// Upper bound of a worker's wait between remove and reinsert, in microseconds.
    #[arg(long, default_value_t = 1000)]
    pub wait_max_us: u64,
    /// Events before the acquisition starts.
    #[arg(long, default_value_t = 200)]
    pub acquire_after: u64,
    /// Events after which workers go idle.
    #[arg(long, default_value_t = 1_000_000)]
    pub mutation_ops: u64,
    #[arg(long, default_value = "bimodal:1000", value_parser = parse_clustering)]
    pub clustering: Clustering,
    /// Seed of the first run; run k uses seed + k.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Execute runs concurrently.
    #[arg(long)]
    pub parallel: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    /// Counter array in trace format.
    #[arg(long)]
    pub gca: PathBuf,
    /// Also run the brute-force oracle against `--trace`.
    #[arg(long, requires = "trace")]
    pub oracle: bool,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write the report here as well as to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct AggregateArgs {
    /// Directory searched recursively for `report` files.
    #[arg(long)]
    pub reports: PathBuf,
    /// Write the machine-readable record here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Print the machine-readable record instead of the table.
    #[arg(long)]
    pub machine: bool,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
pub struct SpreadArgs {
    /// JSON array of page numbers.
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Experiment bundle directory.
    #[arg(long)]
    pub bundle: Option<PathBuf>,
}

fn parse_clustering(s: &str) -> Result<Clustering, String> {
    let (kind, gap) = match s.split_once(':') {
        Some((k, g)) => (
            k,
            Some(g.parse::<u64>().map_err(|e| format!("bad gap: {e}"))?),
        ),
        None => (s, None),
    };
    match (kind, gap) {
        ("packed", None) => Ok(Clustering::Packed),
        ("uniform", Some(gap)) => Ok(Clustering::Uniform { gap }),
        ("bimodal", Some(gap)) => Ok(Clustering::Bimodal { gap }),
        _ => Err("expected packed, uniform:GAP or bimodal:GAP".into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Pivot(a) => commands::pivot(a),
        Command::Check(a) => commands::check(a),
        Command::Aggregate(a) => commands::aggregate(a),
        Command::Spread(a) => commands::spread(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
