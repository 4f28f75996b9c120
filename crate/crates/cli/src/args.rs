use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rwn_core::BackendKind;

#[derive(Debug, Parser)]
#[command(
    name = "rwn",
    version,
    about = "Randomization within neighborhoods for microdata release"
)]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Perturb a CSV file and write the release plus a run manifest.
    Perturb(PerturbArgs),
    /// Compare an original file with its release.
    Evaluate(EvaluateArgs),
    /// Per-record minimum distance and neighborhood size, one table per ε.
    Diagnose(DiagnoseArgs),
    /// Distance-evaluation counts and wall time on synthetic data.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input CSV with a header row.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,

    /// JSON column schema; inferred from the data when absent.
    #[arg(long)]
    pub schema: Option<PathBuf>,

    /// Token written for, and read as, a missing cell.
    #[arg(long)]
    pub na: Option<String>,
}

/// Every key of the JSON config file has a flag of the same name; flags win.
#[derive(Debug, Args, Default)]
pub struct ParamArgs {
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Neighborhood radius in standardized units (diagnose accepts a list).
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,

    /// Minimum neighborhood size.
    #[arg(long)]
    pub k: Option<usize>,

    /// Per-cell modification probability.
    #[arg(long)]
    pub q: Option<f64>,

    /// Falls back to the config file, then to RWN_SEED.
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub backend: Option<BackendKind>,

    /// Pool size (pool) or sampled pairs per record (pair-sample).
    #[arg(long)]
    pub m: Option<usize>,

    /// Number of partitions (partitioned).
    #[arg(long)]
    pub u: Option<usize>,

    /// Backend run inside each partition.
    #[arg(long)]
    pub inner: Option<BackendKind>,

    /// Draw a separate pool for every record.
    #[arg(long)]
    pub fresh_pool_per_point: bool,

    /// Distance weight for one column, as NAME=VALUE; repeatable.
    #[arg(long = "weight", value_parser = parse_weight)]
    pub weights: Vec<(String, f64)>,
}

fn parse_weight(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let value = value.parse::<f64>().map_err(|e| format!("weight for `{name}`: {e}"))?;
    Ok((name.to_string(), value))
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub params: ParamArgs,

    /// Output CSV; the manifest goes next to it as `<stem>.manifest.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Take input, schema, missing token and config from an earlier run's
    /// manifest. Other flags still override.
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Original CSV.
    #[arg(long)]
    pub original: PathBuf,

    /// Released CSV.
    #[arg(long)]
    pub perturbed: PathBuf,

    /// Schema for both files; inferred from the original when absent.
    #[arg(long)]
    pub schema: Option<PathBuf>,

    #[arg(long)]
    pub na: Option<String>,

    /// Regression to compare, as `response~pred1,pred2,...`.
    #[arg(long)]
    pub regress: Option<String>,

    /// Report JSON; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Directory for per-metric CSV tables.
    #[arg(long)]
    pub tables: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub params: ParamArgs,

    /// Directory receiving `min_distance_eps_<ε>.csv` per radius.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1000, 2000, 4000])]
    pub sizes: Vec<usize>,

    #[arg(long, value_delimiter = ',', default_values_t = [
        BackendKind::Exact,
        BackendKind::Pool,
        BackendKind::PairSample,
        BackendKind::Partitioned,
    ])]
    pub backends: Vec<BackendKind>,

    /// Numeric columns of the synthetic data.
    #[arg(long, default_value_t = 4)]
    pub dims: usize,

    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,

    #[arg(long, default_value_t = 5)]
    pub k: usize,

    #[arg(long, default_value_t = 100)]
    pub m: usize,

    #[arg(long, default_value_t = 4)]
    pub u: usize,

    #[arg(long, default_value_t = BackendKind::Exact)]
    pub inner: BackendKind,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
