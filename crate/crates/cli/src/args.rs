//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hiercc_core::SchemeId;

#[derive(Debug, Parser)]
#[command(name = "hiercc", version, about = "Hierarchical coded caching simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep demands end to end and audit decoding, rates and memories.
    Verify(VerifyArgs),
    /// Emit the rate/memory table for a list of (N, K1, K2) triples.
    Table(TableArgs),
    /// Print a symbolic transcript of one episode with a decode narrative.
    Trace(TraceArgs),
    /// Emit corner and scheme (M1, M2, Rbar) points as CSV.
    Points(PointsArgs),
}

/// Instance selection shared by the subcommands; flags override `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct InstanceArgs {
    /// Flat `key = value` file with any of: k1, k2, n, l, prime, seed,
    /// scheme, mode, trials, workers, budget.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of mirrors.
    #[arg(long)]
    pub k1: Option<usize>,
    /// Users per mirror.
    #[arg(long)]
    pub k2: Option<usize>,
    /// Number of files.
    #[arg(long)]
    pub n: Option<usize>,
    /// Symbols per subfile.
    #[arg(long)]
    pub l: Option<usize>,
    /// Field prime (defaults to the smallest admissible one).
    #[arg(long)]
    pub prime: Option<u32>,
    /// Seed for random demands and library contents.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeChoice {
    #[value(name = "1")]
    First,
    #[value(name = "2")]
    Second,
    Both,
}

impl SchemeChoice {
    pub fn schemes(self) -> Vec<SchemeId> {
        match self {
            SchemeChoice::First => vec![SchemeId::First],
            SchemeChoice::Second => vec![SchemeId::Second],
            SchemeChoice::Both => vec![SchemeId::First, SchemeId::Second],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeChoice {
    Exhaustive,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleChoice {
    /// On for exhaustive sweeps, off for random ones.
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeChoice>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeChoice>,
    /// Number of random demands (random mode).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Worker threads for the sweep.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Maximum number of demands an exhaustive sweep may enumerate.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Cross-check every user with the linear-algebra decodability oracle.
    #[arg(long, value_enum, default_value = "auto")]
    pub oracle: OracleChoice,
    /// Raw files to use as the library instead of random contents (exactly N).
    #[arg(long, value_delimiter = ',')]
    pub files: Vec<PathBuf>,
    /// Where to write the JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Triple `N,K1,K2`; repeat for several rows.
    #[arg(long = "row", value_parser = parse_triple)]
    pub rows: Vec<(usize, usize, usize)>,
    /// Append the published baseline numbers, tagged with their source.
    #[arg(long)]
    pub with_paper_baselines: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Option<SchemeId>,
    /// Comma-separated demand vector, e.g. `1,1,2,2,3,3`.
    #[arg(long)]
    pub demand: Option<String>,
    /// Mirrors whose transmissions are listed (default: all).
    #[arg(long, value_delimiter = ',')]
    pub mirrors: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct PointsArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
}

pub fn parse_triple(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [n, k1, k2] = parts.as_slice() else {
        return Err(format!("expected N,K1,K2, got `{s}`"));
    };
    let num = |v: &str| v.parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((num(n)?, num(k1)?, num(k2)?))
}

pub fn parse_scheme(s: &str) -> Result<SchemeId, String> {
    match s {
        "1" => Ok(SchemeId::First),
        "2" => Ok(SchemeId::Second),
        _ => Err(format!("scheme must be 1 or 2, got `{s}`")),
    }
}
