use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use irs_deploy::tiles::SolverOptions;

#[derive(Debug, Parser)]
#[command(name = "irsplan", version, about = "Plan passive/active reflecting-surface deployments for indoor coverage")]
pub struct Cli {
    /// Barrier solver stopping tolerance on the duality measure.
    #[arg(long, global = true, default_value_t = SolverOptions::default().tolerance)]
    pub tolerance: f64,

    /// Newton steps allowed per centering step.
    #[arg(long, global = true, default_value_t = SolverOptions::default().max_newton_iters)]
    pub max_newton_iters: usize,

    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            tolerance: self.tolerance,
            max_newton_iters: self.max_newton_iters,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario file and print a summary.
    Validate {
        scenario: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Per-cell SNR and cost of a plan.
    Evaluate {
        scenario: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        /// Report cells below this target and exit 1 if any.
        #[arg(long)]
        gamma0_db: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Tile counts for fixed passive and active locations.
    OptimizeTiles {
        scenario: PathBuf,
        #[command(flatten)]
        locations: LocationArgs,
        #[arg(long)]
        gamma0_db: f64,
        #[arg(long, value_enum, default_value_t = TileMethod::Refine)]
        method: TileMethod,
    },
    /// Joint placement and tile sizing.
    Optimize {
        scenario: PathBuf,
        #[arg(long)]
        gamma0_db: f64,
        /// Run a benchmark scheme instead of the joint search.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        benchmark: Option<u8>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Also write the resulting plan to this file.
        #[arg(long)]
        plan_out: Option<PathBuf>,
    },
    /// Cost sweep over the SNR target or the active tile price, as CSV.
    Sweep(SweepArgs),
    /// Brute-force counterparts of the fast solvers.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Debug, Args)]
pub struct LocationArgs {
    /// Comma-separated passive cells.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub passive: Vec<usize>,
    /// Comma-separated active cells.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub active: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TileMethod {
    Refine,
    Exhaustive,
    Equal,
}

impl TileMethod {
    pub fn name(self) -> &'static str {
        match self {
            TileMethod::Refine => "refine",
            TileMethod::Exhaustive => "exhaustive",
            TileMethod::Equal => "equal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVar {
    #[value(name = "gamma0_db")]
    Gamma0Db,
    #[value(name = "active_tile_cost")]
    ActiveTileCost,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub scenario: PathBuf,
    #[arg(long = "var", value_enum)]
    pub variable: SweepVar,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long)]
    pub step: f64,
    #[arg(long, value_delimiter = ',', default_value = "joint,bench1,bench2,bench3")]
    pub schemes: Vec<String>,
    /// Fixed SNR target when sweeping the active tile price.
    #[arg(long)]
    pub gamma0_db: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Output file; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// SNR of one explicit path from complex channels, next to the closed form.
    Snr {
        scenario: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        /// Vertex ids; `uJ` names the user vertex of cell J.
        #[arg(long, value_delimiter = ',')]
        path: Vec<String>,
        /// Active surface on the path, if any.
        #[arg(long)]
        airs: Option<usize>,
    },
    /// Exhaustive best path per cell, next to the router's answer.
    Path {
        scenario: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        cell: Option<usize>,
    },
    /// Exhaustive tile search for fixed locations.
    Tiles {
        scenario: PathBuf,
        #[command(flatten)]
        locations: LocationArgs,
        #[arg(long)]
        gamma0_db: f64,
    },
    /// Full enumeration of location pairs without pruning.
    Deploy {
        scenario: PathBuf,
        #[arg(long)]
        gamma0_db: f64,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        benchmark: Option<u8>,
    },
}

pub fn scheme_name(benchmark: Option<u8>) -> &'static str {
    match benchmark {
        None => "joint",
        Some(1) => "bench1",
        Some(2) => "bench2",
        Some(_) => "bench3",
    }
}
