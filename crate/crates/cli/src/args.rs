use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "rbmcompose", version, about = "Compose, train and sample RBM logic units")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "command")]
pub enum Command {
    /// Build a model from a generator name or a netlist file
    Build(BuildArgs),
    /// Train an adder or multiplier unit by contrastive divergence
    Train(TrainArgs),
    /// Clamp a task onto a model and read off the answer
    Solve(SolveArgs),
    /// Run a benchmark suite and write success-curve CSVs
    Bench(BenchArgs),
    /// Exact-analysis report for a small model
    Diagnose(DiagnoseArgs),
    /// Weight statistics and optional dense weight dump
    Inspect(InspectArgs),
    /// Re-run a command from its manifest
    #[serde(skip)]
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Build(_) => "build",
            Command::Train(_) => "train",
            Command::Solve(_) => "solve",
            Command::Bench(_) => "bench",
            Command::Diagnose(_) => "diagnose",
            Command::Inspect(_) => "inspect",
            Command::Replay(_) => "replay",
        }
    }
}

/// Options shared by every command that writes files.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
pub struct Common {
    /// Output directory (default: $RBMCOMPOSE_OUT_DIR, else the current directory)
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// TOML or JSON file with default settings; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct BuildArgs {
    /// Builtin or generator name (fa1, dfa4, adder16, mult8, ...) or a netlist .json file
    pub target: String,
    /// Base unit for adder<n> / mult<n> generators (builtin name or model file)
    #[arg(long)]
    pub base: Option<String>,
    /// Adder unit used by the mult<n> generator
    #[arg(long)]
    pub adder_base: Option<String>,
    /// Sharpness of directly calculated units
    #[arg(long)]
    pub sharpness: Option<f64>,
    /// Output model file name, relative to the output directory
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct TrainArgs {
    /// adder<n> or mult<n>
    pub task: String,
    /// Hidden units (defaults to the reference table where listed)
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub epochs_per_stage: Option<usize>,
    #[arg(long)]
    pub copies_per_epoch: Option<usize>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub max_dataset: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output model file name, relative to the output directory
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Effective settings after merging the config file and flags
    #[arg(skip)]
    pub resolved: Option<rbmcompose::TrainConfig>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct SolveArgs {
    /// Model file or builtin name (optional with --cnf)
    #[arg(long)]
    pub model: Option<String>,
    /// add, subtract, reverse_carry, multiply, divide, factor or sat
    #[arg(long)]
    pub op: String,
    /// Operand bit width
    #[arg(long, default_value_t = 0)]
    pub width: usize,
    /// Clamp an operand, e.g. --set A=100 (repeatable)
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
    /// Clamp a single named terminal, e.g. --bit x3=1 (repeatable)
    #[arg(long = "bit", value_name = "NAME=0|1")]
    pub bits: Vec<String>,
    /// Expected answer operand, e.g. --expect S=155 (repeatable)
    #[arg(long = "expect", value_name = "NAME=VALUE")]
    pub expect: Vec<String>,
    /// DIMACS formula for sat tasks
    #[arg(long)]
    pub cnf: Option<PathBuf>,
    /// Enumerate the conditional distribution instead of sampling
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub chains: Option<usize>,
    /// Recorded samples, pooled over chains
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sharpness: Option<f64>,
    /// Ranked answers written to the CSV
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct BenchArgs {
    /// Suite file (TOML or JSON)
    pub suite: Option<PathBuf>,
    #[arg(skip)]
    pub resolved: Option<crate::bench::Suite>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    #[default]
    HiddenFirst,
    VisibleFirst,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct DiagnoseArgs {
    /// Model file or builtin name
    #[arg(long)]
    pub model: String,
    /// Ideal table to compare against: a gate name, adder<n> or mult<n>
    #[arg(long)]
    pub table: Option<String>,
    #[arg(long)]
    pub sharpness: Option<f64>,
    /// Also write TV decay against the bound for this many sweeps
    #[arg(long)]
    pub decay_steps: Option<u32>,
    #[arg(long, value_enum, default_value_t = Order::HiddenFirst)]
    pub order: Order,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct InspectArgs {
    /// Model file or builtin name
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub sharpness: Option<f64>,
    /// Weights with |w| at or below this count as zero
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Write the dense weight matrix as CSV
    #[arg(long)]
    pub dump_weights: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write outputs here instead of the recorded directory
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
