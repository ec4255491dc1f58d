use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "biasshift",
    version,
    about = "Measure attribute bias shift between reference and generated classifier logits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare a generated score table against a reference table.
    Analyze(AnalyzeArgs),
    /// Boundary density and spectrum category of each attribute in one table.
    Categorize(CategorizeArgs),
    /// ABS between random subsets of a table and the full table.
    SamplingError(SamplingErrorArgs),
    /// Translation-shift simulation on Gaussian mixtures.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Per-attribute decision threshold in logit space, ATTR=VALUE (repeatable).
    #[arg(long = "threshold", value_name = "ATTR=VALUE", value_parser = parse_override)]
    pub thresholds: Vec<(String, f64)>,

    /// Threshold for attributes without an override.
    #[arg(long, value_name = "FLOAT", default_value_t = 0.0, allow_negative_numbers = true)]
    pub default_threshold: f64,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Reference score table (validation-role split).
    #[arg(long = "ref", value_name = "PATH")]
    pub reference: PathBuf,

    /// Generated score table.
    #[arg(long = "gen", value_name = "PATH")]
    pub generated: PathBuf,

    /// Report path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(flatten)]
    pub thresholds: ThresholdArgs,

    /// Boundary density above which an attribute counts as spectrum-based.
    #[arg(long, value_name = "FLOAT", default_value_t = 0.01)]
    pub cat_threshold: f64,

    /// Seed for the bootstrap intervals.
    #[arg(long, value_name = "UINT64", default_value_t = 0)]
    pub seed: u64,

    /// Bootstrap replicates per proportion; 0 disables intervals.
    #[arg(long, value_name = "UINT", default_value_t = 100)]
    pub replicates: usize,

    /// Split name recorded for the reference table.
    #[arg(long, value_name = "NAME", default_value = "val")]
    pub ref_split: String,

    /// Split name recorded for the generated table.
    #[arg(long, value_name = "NAME", default_value = "gen")]
    pub gen_split: String,

    /// Also write plot-ready per-attribute density curves (CSV).
    #[arg(long, value_name = "PATH")]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CategorizeArgs {
    /// Score table to categorize (validation-role split).
    #[arg(long = "ref", value_name = "PATH")]
    pub reference: PathBuf,

    /// Output CSV; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub thresholds: ThresholdArgs,

    /// Boundary density above which an attribute counts as spectrum-based.
    #[arg(long, value_name = "FLOAT", default_value_t = 0.01)]
    pub cat_threshold: f64,
}

#[derive(Debug, Args)]
pub struct SamplingErrorArgs {
    /// Reference score table to subsample.
    #[arg(long = "ref", value_name = "PATH")]
    pub reference: PathBuf,

    /// Output CSV; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Subset sizes.
    #[arg(long, value_name = "CSV-of-ints", value_delimiter = ',', default_value = "100,1000,10000")]
    pub sizes: Vec<usize>,

    /// Subsets drawn per size.
    #[arg(long, value_name = "UINT", default_value_t = 100)]
    pub replicates: usize,

    /// Seed for subset selection.
    #[arg(long, value_name = "UINT64", default_value_t = 0)]
    pub seed: u64,

    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Builtin scenario set: fig1 or verification.
    #[arg(long, value_name = "NAME", required_unless_present = "scenario")]
    pub builtin: Option<String>,

    /// Scenario file (repeatable).
    #[arg(long, value_name = "PATH")]
    pub scenario: Vec<PathBuf>,

    /// Draws per scenario and side.
    #[arg(long, value_name = "UINT", default_value_t = 1_000_000)]
    pub n: usize,

    /// Seed for the scenario draws.
    #[arg(long, value_name = "UINT64", default_value_t = 0)]
    pub seed: u64,

    /// Output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .rsplit_once('=')
        .ok_or_else(|| format!("expected ATTR=VALUE, got `{s}`"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("threshold `{value}` is not a number"))?;
    if !value.is_finite() {
        return Err(format!("threshold for `{name}` must be finite"));
    }
    if name.is_empty() {
        return Err("empty attribute name in threshold override".into());
    }
    Ok((name.to_owned(), value))
}
