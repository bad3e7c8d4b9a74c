use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vne_core::krylov::{BoundMode, StopRule};
use vne_core::solver::Backend;
use vne_core::sparse::{GraphSpec, Ordering};
use vne_core::trace::{DSelection, Method};

#[derive(Debug, Parser)]
#[command(name = "vne", version, about = "Von Neumann entropy of large sparse density matrices")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the entropy of a matrix or generated graph.
    Entropy(EntropyArgs),
    /// Tabulate polynomial approximation bounds for x log x.
    Bounds(BoundsArgs),
    /// Build a distance-d coloring and report its class sizes.
    ColorStats(ColorStatsArgs),
    /// Probing error against the dense oracle for a range of distances.
    ProbingSweep(SweepArgs),
    /// Time an estimator on generated graphs of growing size.
    BenchScaling(BenchArgs),
    /// Per-iteration error bounds of the Krylov engine on a diagonal test matrix.
    KrylovTrace(KrylovTraceArgs),
}

/// Where the matrix comes from.
#[derive(Debug, Args, Clone)]
#[group(required = true, multiple = false)]
pub struct InputArgs {
    /// Matrix Market file (`.mtx`) or binary CSR file (`.bin`)
    #[arg(long = "in", value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// generator: `grid2d:SIDE` or `ba:N:M`
    #[arg(long = "gen", value_name = "SPEC")]
    pub generator: Option<GraphSpec>,
}

#[derive(Debug, Args, Clone)]
pub struct EstimatorArgs {
    #[arg(long, default_value = "probing")]
    pub method: Method,
    /// relative tolerance
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// failure probability of the stochastic methods
    #[arg(long, default_value_t = 1e-2)]
    pub delta: f64,
    #[arg(long, default_value = "bound")]
    pub stop: StopRule,
    /// fixed probing distance (overrides --select)
    #[arg(long)]
    pub d: Option<usize>,
    /// probing distance rule: heuristic or apriori
    #[arg(long, default_value = "apriori")]
    pub select: DSelection,
    #[arg(long, default_value = "degree")]
    pub order: Ordering,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "auto")]
    pub solver: Backend,
    /// Krylov bound construction: swap or aux
    #[arg(long = "bound-mode", default_value = "swap")]
    pub bound_mode: BoundMode,
    #[arg(long = "max-iters", default_value_t = 150)]
    pub max_iters: usize,
    /// largest distance tried by the a priori rule
    #[arg(long = "d-max", default_value_t = 64)]
    pub d_max: usize,
    /// cap on vectors used by the stochastic methods
    #[arg(long = "max-vectors", default_value_t = 10_000)]
    pub max_vectors: usize,
    /// sketch size of plain Hutch++
    #[arg(long = "sketch", default_value_t = 10)]
    pub sketch: usize,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub est: EstimatorArgs,
    /// worker threads for quadratic forms
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// write the report here instead of stdout
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// `key = value` file; flags given on the command line take precedence
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long = "k-min", default_value_t = 2)]
    pub k_min: usize,
    #[arg(long = "k-max", default_value_t = 60)]
    pub k_max: usize,
    /// add the interpolation-based oracle column
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ColoringKind {
    Greedy,
    Banded,
    Grid,
}

#[derive(Debug, Args)]
pub struct ColorStatsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value = "degree")]
    pub order: Ordering,
    #[arg(long = "method", value_enum, default_value = "greedy")]
    pub kind: ColoringKind,
    /// build the greedy coloring from the pattern of A^d instead of BFS
    #[arg(long = "via-power")]
    pub via_power: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long = "d-min", default_value_t = 1)]
    pub d_min: usize,
    #[arg(long = "d-max", default_value_t = 12)]
    pub d_max: usize,
    #[arg(long, default_value = "degree")]
    pub order: Ordering,
    #[arg(long = "method", value_enum, default_value = "greedy")]
    pub kind: ColoringKind,
    /// Krylov tolerance relative to the diagonal entropy
    #[arg(long = "krylov-tol", default_value_t = 1e-10)]
    pub krylov_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Family {
    Grid2d,
    Ba,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "grid2d")]
    pub family: Family,
    /// attachment parameter of the BA graphs
    #[arg(long, default_value_t = 2)]
    pub attach: usize,
    /// sizes are 2^min-exp .. 2^max-exp
    #[arg(long = "min-exp", default_value_t = 10)]
    pub min_exp: u32,
    #[arg(long = "max-exp", default_value_t = 16)]
    pub max_exp: u32,
    #[command(flatten)]
    pub est: EstimatorArgs,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// stop the sweep once a point takes longer than this many seconds
    #[arg(long, default_value_t = 600.0)]
    pub timeout: f64,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KrylovTraceArgs {
    /// size of the diagonal matrix with Chebyshev points as eigenvalues
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub a: f64,
    #[arg(long, default_value_t = 1e3)]
    pub b: f64,
    /// `poly`, `eds` or `mixed:K` (K infinite poles, then EDS)
    #[arg(long, default_value = "mixed:10")]
    pub schedule: String,
    #[arg(long, default_value_t = 30)]
    pub iters: usize,
    #[arg(long = "bound-mode", default_value = "swap")]
    pub bound_mode: BoundMode,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}
