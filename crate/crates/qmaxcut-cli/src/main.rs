//! `qmaxcut`: command-line front end for QAOA MaxCut experiments.
//!
//! Subcommands: `generate`, `train`, `eval`, `gw`, `brute`, `compile`,
//! `resources`, `protocol-dump`. Exit codes: 0 on success, 2 for input
//! errors, 3 for numeric failures.

mod commands;
mod config;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// CLI failure with its exit code semantics.
#[derive(Debug)]
pub enum CliError {
    /// Missing or malformed inputs (exit code 2).
    Input(String),
    /// A computation produced a non-finite or inconsistent result (exit 3).
    Numeric(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        CliError::Numeric(msg.into())
    }
}

impl From<qmaxcut::Error> for CliError {
    fn from(err: qmaxcut::Error) -> Self {
        match err {
            qmaxcut::Error::NonFinite(msg) => CliError::Numeric(msg),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qmaxcut",
    version,
    about = "Train and benchmark QAOA on MaxCut, compare against Goemans-Williamson, and compile to a linear qubit array"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample train/test Erdős–Rényi graph files for every node size
    Generate(ExperimentArgs),
    /// Train one protocol per (node size, QAOA steps) cell
    Train(ExperimentArgs),
    /// Evaluate trained checkpoints and the GW baseline on the test sets
    Eval(ExperimentArgs),
    /// Run Goemans-Williamson on every graph in a file
    Gw(GwArgs),
    /// Brute-force optimum for every graph in a file
    Brute(BruteArgs),
    /// Compile one graph's QAOA circuit and report its CNOT count
    Compile(CompileArgs),
    /// Exact CNOT-count table over a (node size, steps) grid
    Resources(ResourcesArgs),
    /// Dump a checkpoint's angles as plot-ready CSV
    ProtocolDump(ProtocolDumpArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment configuration file (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn load(&self) -> Result<config::ExperimentConfig, CliError> {
        let mut cfg = config::ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct GwArgs {
    /// Graph file to benchmark
    #[arg(long)]
    graphs: PathBuf,
    /// Hyperplane-rounding rounds per graph
    #[arg(long, default_value_t = qmaxcut::gw::DEFAULT_ROUNDS)]
    rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (defaults to the graph file's directory)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BruteArgs {
    /// Graph file to solve exactly
    #[arg(long)]
    graphs: PathBuf,
    /// Output directory (defaults to the graph file's directory)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Topology {
    /// Direct two-qubit gates between any pair
    AllToAll,
    /// Linear array via the brickwork swap network
    Linear,
}

#[derive(Args)]
struct CompileArgs {
    /// Graph file holding the instance
    #[arg(long)]
    graphs: PathBuf,
    /// Index of the graph within the file
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, value_enum, default_value_t = Topology::Linear)]
    topology: Topology,
    /// Take the protocol from a trained checkpoint
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Without a checkpoint: QAOA steps for a freshly initialized protocol
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (defaults to the graph file's directory)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ResourcesArgs {
    /// Node sizes, comma separated (all >= 2)
    #[arg(long, value_delimiter = ',', required = true)]
    node_sizes: Vec<usize>,
    /// QAOA step counts, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    steps: Vec<usize>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ProtocolDumpArgs {
    /// Checkpoint file to dump
    #[arg(long)]
    checkpoint: PathBuf,
    /// Output directory (defaults to the checkpoint's directory)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run() -> Result<(), CliError> {
    match Cli::parse().command {
        Command::Generate(args) => commands::generate(&args.load()?),
        Command::Train(args) => commands::train(&args.load()?),
        Command::Eval(args) => commands::eval(&args.load()?),
        Command::Gw(args) => commands::gw(&args.graphs, args.rounds, args.seed, args.out.as_deref()),
        Command::Brute(args) => commands::brute(&args.graphs, args.out.as_deref()),
        Command::Compile(args) => commands::compile(&args),
        Command::Resources(args) => commands::resources(&args.node_sizes, &args.steps, &args.out),
        Command::ProtocolDump(args) => {
            commands::protocol_dump(&args.checkpoint, args.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
