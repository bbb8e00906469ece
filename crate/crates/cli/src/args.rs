use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use record_gof::mc::{DEFAULT_LEVELS, DEFAULT_SIZES};
use serde::Serialize;

#[derive(Parser, Debug, Clone, Serialize)]
#[command(
    name = "recgof",
    version,
    about = "Goodness-of-fit tests for Weibull lifetimes observed through lower records"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalArgs {
    /// Seed for Monte-Carlo simulation
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Simulation threads; 1 runs sequentially [default: available cores]
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Write the main output to this file instead of standard output
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the nonparametric survival step function as CSV
    #[arg(long, global = true, value_name = "PATH")]
    pub emit_steps: Option<PathBuf>,

    /// Write the Weibull log-likelihood surface as CSV
    #[arg(long, global = true, value_name = "PATH")]
    pub emit_loglik_grid: Option<PathBuf>,

    /// Shape range of the log-likelihood grid [default: MLE +/- 50%]
    #[arg(long, global = true, value_name = "LO,HI", value_parser = parse_range)]
    pub grid_alpha: Option<(f64, f64)>,

    /// Scale range of the log-likelihood grid [default: MLE +/- 50%]
    #[arg(long, global = true, value_name = "LO,HI", value_parser = parse_range)]
    pub grid_sigma: Option<(f64, f64)>,

    /// Points per axis of the log-likelihood grid
    #[arg(long, global = true, default_value_t = 101)]
    pub grid_steps: usize,

    /// Interpolate critical values linearly between tabulated sample sizes
    #[arg(long, global = true)]
    pub interpolate_n: bool,

    /// Leave wall-clock fields out of reports
    #[arg(long, global = true)]
    pub deterministic: bool,

    /// Suppress the summary on standard error
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Weibull,
    Exponential,
    Both,
}

/// Where the records come from.
#[derive(Args, Debug, Clone, Serialize)]
pub struct RecordInput {
    /// Record file (JSON), or a raw sample with --sample
    pub records: PathBuf,

    /// Treat the input as a complete sample and extract its records first
    #[arg(long)]
    pub sample: bool,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Extract lower records from a complete sample
    Extract {
        /// One positive number per line, in observation order
        input: PathBuf,
    },
    /// Fit the Weibull and/or exponential model by maximum likelihood
    Fit {
        #[command(flatten)]
        input: RecordInput,
        #[arg(long, value_enum, default_value_t = ModelChoice::Weibull)]
        model: ModelChoice,
    },
    /// Test the Weibull model with tabulated critical values
    Test {
        #[command(flatten)]
        input: RecordInput,
        /// Critical value table written by `simulate`
        #[arg(long)]
        table: PathBuf,
        /// Statistics to compute (ks, cm, ds)
        #[arg(long, value_delimiter = ',', default_value = "ks,cm,ds")]
        stats: Vec<String>,
        /// Significance level
        #[arg(long, default_value_t = 0.05)]
        gamma: f64,
        /// Table row to use instead of the sample's n
        #[arg(long)]
        table_n: Option<u64>,
        /// Fixed shape instead of the MLE (requires --sigma)
        #[arg(long, requires = "sigma")]
        alpha: Option<f64>,
        /// Fixed scale instead of the MLE (requires --alpha)
        #[arg(long, requires = "alpha")]
        sigma: Option<f64>,
    },
    /// Likelihood-ratio test of exponentiality within the Weibull family
    Glr {
        #[command(flatten)]
        input: RecordInput,
        /// Significance level
        #[arg(long, default_value_t = 0.05)]
        gamma: f64,
    },
    /// Simulate null critical values
    Simulate {
        /// Sample sizes
        #[arg(long = "n", value_delimiter = ',', default_values_t = DEFAULT_SIZES)]
        sizes: Vec<u64>,
        /// Quantile levels
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LEVELS)]
        levels: Vec<f64>,
        /// Replicates per sample size
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        /// Also write the table as CSV
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        /// Stamp the table with the current time
        #[arg(long)]
        timestamp: bool,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{lo:?}: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{hi:?}: {e}"))?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(format!("need 0 < LO < HI, got {lo},{hi}"));
    }
    Ok((lo, hi))
}
