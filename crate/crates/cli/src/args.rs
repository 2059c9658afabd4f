use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "kdewatch",
    version,
    about = "Sliding-window KDE outlier detection toolkit"
)]
pub struct Cli {
    /// TOML run configuration. Command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run the detector over a labeled series and score it.
    Detect,
    /// Grid sweep over detector parameters.
    Sweep,
    /// Generate a labeled synthetic series.
    Synth,
    /// Learned-density RMSE against the analytic truth versus window size.
    RmseStudy,
    /// Compare the integer LUT pipeline with the real-valued estimate.
    DigitalCompare,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Detect => "detect",
            Command::Sweep => "sweep",
            Command::Synth => "synth",
            Command::RmseStudy => "rmse-study",
            Command::DigitalCompare => "digital-compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizationArg {
    Proper,
    #[value(name = "unscaled", alias = "paper")]
    Unscaled,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Input series (CSV with header). For `sweep`, a directory selects the
    /// five reference benchmark series inside it.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true, env = "KDEWATCH_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub value_column: Option<String>,
    #[arg(long, global = true)]
    pub label_column: Option<String>,

    #[arg(long, global = true)]
    pub n_in: Option<usize>,
    #[arg(long, global = true)]
    pub sigma_kernel: Option<f64>,
    #[arg(long, global = true)]
    pub p_thres: Option<f64>,
    /// Quantizer resolution; for `digital-compare`, the input word size.
    #[arg(long, global = true)]
    pub bits: Option<u32>,
    #[arg(long, global = true)]
    pub noise_sigma: Option<f64>,
    #[arg(long, global = true)]
    pub perturb_preset: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte-Carlo trials; for `digital-compare`, the number of windows.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Sweep axis, `name=v1,v2,...`. Repeatable.
    #[arg(long = "axis", global = true, value_name = "NAME=V1,V2,...")]
    pub axes: Vec<String>,
    #[arg(long, global = true, value_enum)]
    pub normalization: Option<NormalizationArg>,
    /// Exclude warmup samples from false-positive counts (default true).
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub ignore_warmup: Option<bool>,

    /// Distribution descriptor, e.g. `gaussian:0.4,0.05` or
    /// `mixture:0.5,0.15,0.05;0.5,0.55,0.05`.
    #[arg(long, global = true)]
    pub distribution: Option<String>,
    #[arg(long, global = true)]
    pub length: Option<usize>,
    #[arg(long, global = true)]
    pub anomaly_rate: Option<f64>,
    #[arg(long, global = true)]
    pub anomaly_offset: Option<f64>,
    /// Window sizes for `rmse-study`, comma-separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub n_in_values: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub lut_bits: Option<u32>,
    #[arg(long, global = true)]
    pub lut_value_bits: Option<u32>,
}
