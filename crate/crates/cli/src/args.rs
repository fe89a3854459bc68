use clap::{Args, Parser, Subcommand, ValueEnum};
use qmagic::limits::{DEFAULT_MAX_DIM, DEFAULT_MAX_SUBSETS};
use qmagic::spectral::DEFAULT_TOLERANCE;

#[derive(Debug, Parser)]
#[command(
    name = "qmagic",
    version,
    about = "Exact and spectral checks for q-analogue magic matrices on powers of directed cycles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: Global,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Output format; not every command supports every format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Worker threads for parallel commands (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Largest dimension l^n accepted
    #[arg(long, global = true, env = "QMAGIC_MAX_DIM", default_value_t = DEFAULT_MAX_DIM)]
    pub max_dim: usize,

    /// Largest number of subsets an exhaustive check may enumerate
    #[arg(long, global = true, env = "QMAGIC_MAX_SUBSETS", default_value_t = DEFAULT_MAX_SUBSETS)]
    pub max_subsets: u128,

    /// Include wall-clock timing in reports (makes output non-reproducible)
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Dump,
    Dot,
}

#[derive(Debug, Args)]
pub struct Ln {
    /// Root-of-unity order / cycle length (>= 2)
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub l: u32,

    /// Cartesian power / recursion depth (>= 1)
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub n: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build B_n (dump, JSON entry list, CSV, or the DOT graph of its pattern)
    BuildB(Ln),

    /// Run one of the verification checks
    #[command(subcommand)]
    Verify(Verify),

    /// Eigenvalue multiplicities of B_n via null spaces of B_n - q^k n^(1/l) I
    Spectral {
        #[command(flatten)]
        ln: Ln,
        /// Relative pivot tolerance
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },

    /// Eigenvector of B_n supported on a subset, and the Schur norm bound of B_S
    Witness {
        #[command(flatten)]
        ln: Ln,
        /// Comma-separated vertex indices, or @file with one index per line;
        /// defaults to a seeded random subset of threshold size
        #[arg(long)]
        subset: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },

    /// The digit-sum independent set of C_l^m
    IndepSet {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
        l: u32,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        m: u32,
    },

    /// Local search for a low-degree induced subgraph of a given size
    Search {
        #[command(flatten)]
        ln: Ln,
        #[arg(long)]
        size: usize,
        /// Proposed swaps per chain
        #[arg(long, default_value_t = 10_000)]
        iters: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Init::Random)]
        init: Init,
        /// Independent chains
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
        restarts: u32,
        /// Iterations without progress before a chain restarts (0 = never)
        #[arg(long, default_value_t = 200)]
        stall: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// Exact check of B_n^l = n I over Z[q]
    Identity(Ln),
    /// |B_n| equals the adjacency matrix of C_l^n
    Pattern(Ln),
    /// Degree bound over subsets of size (l-1) l^(n-1) + 1
    Theorem {
        #[command(flatten)]
        ln: Ln,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Init {
    Random,
    Referee,
}
