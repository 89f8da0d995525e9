//! `riot`: generate workflows, schedule them, simulate schedules and compare
//! frontiers.
//!
//! Exit codes: 0 on success, 1 on internal failure, 2 on bad input.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "riot", version, about = "Multi-objective cloud workflow scheduler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic workflow in the native JSON format.
    Gen(GenArgs),
    /// Compute a (makespan, cost) frontier for a workflow.
    Schedule(ScheduleArgs),
    /// Simulate one schedule and report its timeline.
    Simulate(SimulateArgs),
    /// Compare frontiers by hypervolume, IGD and spread.
    Compare(CompareArgs),
}

#[derive(Debug, clap::Args)]
pub struct GenArgs {
    /// montage-like, epigenomics-like, inspiral-like, cybershake-like,
    /// sipht-like, pipeline or fork-join.
    pub shape: String,
    /// Number of tasks.
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Riot,
    Random,
    Heft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, clap::Args)]
pub struct ScheduleArgs {
    /// Workflow file: native JSON or DAX XML.
    pub workflow: PathBuf,
    #[arg(long, value_enum)]
    pub algo: Option<Algo>,
    /// RNG seed; a fresh one is drawn and printed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// VM catalog (JSON or CSV); the built-in m3/m4 types when omitted.
    #[arg(long, env = "RIOT_CATALOG")]
    pub catalog: Option<PathBuf>,
    /// Comma-separated η values.
    #[arg(long, value_delimiter = ',')]
    pub eta_grid: Option<Vec<f64>>,
    /// Random mappings scored per clustering.
    #[arg(long)]
    pub n_random: Option<usize>,
    /// Random anchors per clustering on top of the iso-mappings.
    #[arg(long)]
    pub n_anchor: Option<usize>,
    /// Let already simulated anchors into the final frontier (riot only).
    #[arg(long)]
    pub keep_anchors: bool,
    /// Simulation budget for `--algo random`.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Output prefix; writes `<out>.csv` and `<out>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Format printed to stdout when `--out` is not given.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// TOML file with defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    pub workflow: PathBuf,
    /// Schedule JSON, or a frontier JSON report (see `--point`).
    pub schedule: PathBuf,
    /// Which point to take when `schedule` is a frontier report.
    #[arg(long, default_value_t = 0)]
    pub point: usize,
    #[arg(long, env = "RIOT_CATALOG")]
    pub catalog: Option<PathBuf>,
    /// Evaluation JSON output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct CompareArgs {
    /// Two or more frontier files (CSV or JSON).
    #[arg(required = true, num_args = 2..)]
    pub frontiers: Vec<PathBuf>,
    /// Average IGD over frontier points instead of reference points.
    #[arg(long)]
    pub igd_from_frontier: bool,
    /// Report JSON output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Schedule(args) => commands::schedule(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Compare(args) => commands::compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if commands::is_input_error(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
