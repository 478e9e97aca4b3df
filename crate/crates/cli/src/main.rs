use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Communication-avoiding QR: factor matrices, run out-of-core and
/// distributed demos, sweep stability and evaluate cost models.
///
/// Exit status: 0 on success, 1 on numerical failure (breakdown, loss of
/// orthogonality beyond the limit), 2 on I/O or configuration errors.
#[derive(Debug, Parser)]
#[command(name = "tsqr", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factor a matrix read from MAT1 or CSV and write R.
    Factor(FactorArgs),
    /// Write a seeded test matrix with prescribed condition number.
    Gen(GenArgs),
    /// Sequential TSQR through an on-disk block store with a capped
    /// fast-memory budget.
    Oocdemo(OocArgs),
    /// Cost models: speedup report or a single formula evaluation.
    Model(ModelArgs),
    /// Orthogonality and residual of every algorithm over a kappa sweep.
    Stability(StabilityArgs),
    /// CAQR on a 2-D block-cyclic grid with a message census.
    Caqr(CaqrArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Tsqr,
    Householder,
    Cgs,
    Mgs,
    Choleskyqr,
    Caqr,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    #[arg(long, value_enum, default_value_t = Algo::Tsqr)]
    pub algo: Algo,
    /// Reduction tree for tsqr: binary:P, flat:P or qary:Q:P.
    #[arg(long, default_value = "binary:1")]
    pub tree: String,
    /// Process grid for caqr, as PrxPc.
    #[arg(long, default_value = "1x1")]
    pub grid: String,
    /// Block size for caqr and panel width for householder.
    #[arg(long, default_value_t = 32)]
    pub block: usize,
    /// Input matrix (.csv for CSV, anything else MAT1).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Where to write R.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the explicit thin Q.
    #[arg(long)]
    pub q_out: Option<PathBuf>,
    /// Print relative residual and orthogonality loss.
    #[arg(long)]
    pub verify: bool,
    /// Accept results whose orthogonality loss exceeds --max-loss.
    #[arg(long)]
    pub allow_unstable: bool,
    /// Orthogonality loss above which cgs, mgs and choleskyqr fail.
    #[arg(long, default_value_t = 1e-8)]
    pub max_loss: f64,
    /// More than 1 runs each worker on its own thread.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OocArgs {
    /// Input matrix; a seeded random m x n matrix when absent.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 4096)]
    pub m: usize,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fast-memory budget in words.
    #[arg(long)]
    pub w: usize,
    /// Directory for the block store.
    #[arg(long)]
    pub dir: PathBuf,
    /// Where to write R.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// `peta` or a TOML/JSON machine description.
    #[arg(long, default_value = "peta")]
    pub machine: String,
    /// Write the speedup report as CSV here ("-" for stdout).
    #[arg(long)]
    pub report: Option<String>,
    /// Comma-separated log10 n values for the report.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<f64>>,
    /// Evaluate one formula and print it as JSON.
    #[arg(long, value_enum)]
    pub eval: Option<Formula>,
    #[arg(long, default_value_t = 10000.0)]
    pub m: f64,
    #[arg(long, default_value_t = 10000.0)]
    pub n: f64,
    /// Processor count for the 1-D formulas.
    #[arg(long, default_value_t = 64.0)]
    pub p: f64,
    /// Grid for the 2-D formulas, as PrxPc.
    #[arg(long, default_value = "64x64")]
    pub grid: String,
    #[arg(long, default_value_t = 50.0)]
    pub block: f64,
    /// Fast memory in words for the sequential formulas (machine value when absent).
    #[arg(long)]
    pub w: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Formula {
    Caqr,
    Pdgeqrf,
    ParTsqr,
    SeqTsqr,
    ParHouseholder,
    ParCholeskyqr,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[arg(long, default_value_t = 1000)]
    pub m: usize,
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    /// Comma-separated condition numbers; empty for none.
    #[arg(long, default_value = "1,1e3,1e6,1e9,1e12")]
    pub kappas: String,
    /// Number of seeds per condition number (seeds 0..N).
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    /// Summary CSV ("-" for stdout).
    #[arg(long, default_value = "-")]
    pub out: String,
    /// Per-seed CSV.
    #[arg(long)]
    pub cells: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CaqrArgs {
    #[arg(long, default_value = "2x2")]
    pub grid: String,
    #[arg(long, default_value_t = 8)]
    pub block: usize,
    /// Input matrix; a seeded random m x n matrix when absent.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub m: usize,
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write R.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Message census CSV.
    #[arg(long)]
    pub census: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
