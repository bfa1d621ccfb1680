use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use copula_split::{CopulaFamily, Scheme};

#[derive(Debug, Parser)]
#[command(
    name = "copula-split",
    version,
    about = "Bivariate copula fits by maximum pseudo-likelihood, whole or split into independent blocks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a copula to a two-column CSV file.
    Fit(FitArgs),
    /// Partition the rows into blocks, fit each block on its own and combine
    /// the estimates by inverse-variance weighting.
    SplitFit(SplitFitArgs),
    /// Run the simulation study over families, sample sizes and block counts.
    Simulate(SimulateArgs),
    /// Merge the summary.csv files found under directories into tables.
    Report(ReportArgs),
    /// Draw a sample from a copula and write it as CSV.
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Two numeric columns; a header row is detected automatically.
    pub input: PathBuf,
    #[arg(long, value_parser = parse_family)]
    pub family: CopulaFamily,
    /// Directory for fit.csv and manifest.txt.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitFitArgs {
    pub input: PathBuf,
    #[arg(long, value_parser = parse_family)]
    pub family: CopulaFamily,
    /// Number of blocks M.
    #[arg(long, default_value_t = 10)]
    pub subsets: usize,
    /// Worker threads; 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// contiguous or strided.
    #[arg(long, default_value = "contiguous", value_parser = parse_scheme)]
    pub scheme: Scheme,
    /// Directory for blocks.csv, combined.csv and manifest.txt.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Comma-separated families, or "all".
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub family: Vec<String>,
    /// True parameter; only with a single family. Defaults to 0.3 for
    /// Gaussian and 5 for Frank and Gumbel.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Sample sizes N.
    #[arg(long, value_delimiter = ',', default_value = "50000,100000,200000")]
    pub rows: Vec<usize>,
    /// Block counts M.
    #[arg(long, value_delimiter = ',', default_value = "10,20,100")]
    pub subsets: Vec<usize>,
    /// Replicates S per (family, N, M) cell.
    #[arg(long, default_value_t = 50)]
    pub replicates: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, default_value = "contiguous", value_parser = parse_scheme)]
    pub scheme: Scheme,
    /// Gauss-Legendre nodes per axis for the L1/L2 distances.
    #[arg(long, default_value_t = copula_split::sim::DEFAULT_QUAD_NODES)]
    pub quad_nodes: usize,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Write NA in place of wall-clock columns so that output files depend
    /// only on the seed and the flags.
    #[arg(long)]
    pub no_timings: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directories searched recursively for summary.csv.
    #[arg(required = true)]
    pub dirs: Vec<PathBuf>,
    /// Directory for timing.csv and metrics.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: CopulaFamily,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, default_value_t = 50_000)]
    pub rows: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV file with columns u1,u2.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_family(s: &str) -> Result<CopulaFamily, String> {
    s.parse().map_err(|_| format!("unknown family '{s}' (gaussian, frank, gumbel)"))
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|_| format!("unknown scheme '{s}' (contiguous, strided)"))
}

/// Expand the --family list of the simulate command.
pub fn family_list(names: &[String]) -> Result<Vec<CopulaFamily>, String> {
    let mut out = Vec::new();
    for name in names {
        if name.eq_ignore_ascii_case("all") {
            out.extend(CopulaFamily::ALL);
        } else {
            out.push(parse_family(name)?);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}
