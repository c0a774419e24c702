//! Command-line front end: argument grammar, dispatch and exit codes.
//!
//! Exit code 0 is success, 2 a usage error reported by the parser, 1 any
//! computational or I/O failure (message on standard error).

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub mod commands;
pub mod experiments;
pub mod output;

/// Environment variable capping the worker count (0 or unset = automatic).
pub const THREADS_ENV: &str = "GRAPHON_SAMPLE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "graphon-sample", version, about = "Sampling sets for bandlimited graph signals via graphon limits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select a sampling set.
    Sample(SampleArgs),
    /// Rank-test a stored sample set.
    Verify(VerifyArgs),
    /// Compare reconstruction from graphon and random samples.
    ReconstructExp(ReconstructArgs),
    /// Poincare constant and bandwidth certificate of a node set.
    Poincare(PoincareArgs),
    /// Hit and certification rates of pivot sampling on mixture graphs.
    ConsistencyExp(ConsistencyArgs),
    /// Separation parameters and difficulty of a mixture model.
    Difficulty(DifficultyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Uniform,
    Community,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeOrder {
    /// Ascending degree, ties by index.
    Degree,
    /// Keep the file's node order (latent order for graphon samples).
    Given,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Graphon,
    Greedy,
    Ge,
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct GraphInput {
    /// Edge list file.
    #[arg(long)]
    pub graph: PathBuf,
    /// Node count override (default 1 + largest index).
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub input: GraphInput,
    #[arg(long, value_enum, default_value = "graphon")]
    pub method: Method,
    /// Coarse interval count.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub q: u64,
    /// Intervals to select.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub p: u64,
    /// Node budget.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: Option<u64>,
    /// Band for the pivot sampler.
    #[arg(long = "K", value_parser = clap::value_parser!(u64).range(1..))]
    pub k: Option<u64>,
    #[arg(long, value_enum, default_value = "uniform")]
    pub strategy: Strategy,
    /// Communities per interval for the community strategy.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub c: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "degree")]
    pub order: NodeOrder,
    /// Reuse stored intervals instead of coarsening this graph.
    #[arg(long)]
    pub intervals_in: Option<PathBuf>,
    /// Store the selected intervals for reuse.
    #[arg(long)]
    pub intervals_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: GraphInput,
    /// Sample set JSON.
    #[arg(long)]
    pub set: PathBuf,
    #[arg(long = "K", value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    /// Relative singular-value cutoff (default max(|S|, K) * eps).
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GeneratorArgs {
    /// Nodes per generated graph.
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Equal-size blocks of the generated block model.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub blocks: u64,
    #[arg(long, default_value_t = 0.9)]
    pub intra: f64,
    #[arg(long, default_value_t = 0.05)]
    pub inter: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ReconstructArgs {
    /// Fixed input graph; a block model is generated per trial otherwise.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, value_enum, default_value = "given")]
    pub order: NodeOrder,
    /// Signal band.
    #[arg(long = "K", default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: u64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub q: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub p: u64,
    #[arg(long, value_enum, default_value = "uniform")]
    pub strategy: Strategy,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub c: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record wall time per row (otherwise the ms column is 0).
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PoincareArgs {
    #[command(flatten)]
    pub input: GraphInput,
    /// Node set as a sample set JSON file.
    #[arg(long, conflicts_with = "members", required_unless_present = "members")]
    pub set: Option<PathBuf>,
    /// Node set as comma-separated indices.
    #[arg(long, value_delimiter = ',')]
    pub members: Option<Vec<usize>>,
    /// Random supported signals to test the inequality with.
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ConsistencyArgs {
    /// Mixture model JSON; an equal-weight block mixture otherwise.
    #[arg(long)]
    pub mixture: Option<PathBuf>,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub blocks: u64,
    #[arg(long, default_value_t = 0.9)]
    pub intra: f64,
    #[arg(long, default_value_t = 0.05)]
    pub inter: f64,
    /// Graph sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the expected (blockmodel) matrix instead of Bernoulli edges.
    #[arg(long)]
    pub noiseless: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DifficultyArgs {
    #[arg(long)]
    pub mixture: PathBuf,
    /// Grid cells per support for the indivisibility search.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(2..))]
    pub grid: u64,
    /// Also test the component conditions with A_i the image of support i.
    #[arg(long)]
    pub check: bool,
    /// Frame mismatch for the component conditions (computed when absent).
    #[arg(long)]
    pub eps: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn execute<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("graphon-sample: thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| commands::run(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("graphon-sample: {e}");
            1
        }
    }
}
