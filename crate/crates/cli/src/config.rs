//! Resolution of flags, config file and defaults into one [`RunConfig`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use kdewatch::detector::{DetectorConfig, WarmupPolicy};
use kdewatch::distribution::Distribution;
use kdewatch::estimator::FixedPointSpec;
use kdewatch::eval::{SweepAxis, DEFAULT_LABEL_COLUMN, DEFAULT_VALUE_COLUMN};
use kdewatch::kernels::{KernelSpec, Normalization};
use kdewatch::nonideality::PerturbationModel;
use serde::{Deserialize, Serialize};

use crate::args::{Cli, Command, CommonArgs, NormalizationArg};

/// A configuration problem attributable to one key.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError {
    pub key: String,
    pub message: String,
}

impl UsageError {
    fn new(key: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            key: key.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub value_column: Option<String>,
    pub label_column: Option<String>,
    pub n_in: Option<usize>,
    pub sigma_kernel: Option<f64>,
    pub p_thres: Option<f64>,
    pub bits: Option<u32>,
    pub noise_sigma: Option<f64>,
    pub perturb_preset: Option<String>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub normalization: Option<String>,
    pub ignore_warmup: Option<bool>,
    pub distribution: Option<String>,
    pub length: Option<usize>,
    pub anomaly_rate: Option<f64>,
    pub anomaly_offset: Option<f64>,
    pub n_in_values: Option<Vec<usize>>,
    pub lut_bits: Option<u32>,
    pub lut_value_bits: Option<u32>,
    /// Sweep axes: name → list of values.
    #[serde(default)]
    pub axes: BTreeMap<String, Vec<toml::Value>>,
    /// Explicit perturbation model, used when no preset is named.
    pub perturbation: Option<PerturbationModel>,
    /// Additional named perturbation presets.
    #[serde(default)]
    pub presets: BTreeMap<String, PerturbationModel>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError::new("--config", format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| UsageError::new("--config", e))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub detector: DetectorConfig,
    /// Name of the resolved perturbation preset, if one was used.
    pub perturb_preset: Option<String>,
    pub input: Option<PathBuf>,
    /// Where outputs go; not part of the reproducible record.
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub value_column: String,
    pub label_column: String,
    pub trials: usize,
    pub ignore_warmup: bool,
    pub axes: Vec<SweepAxis>,
    pub distribution: Distribution,
    pub length: usize,
    pub anomaly_rate: f64,
    pub anomaly_offset: f64,
    pub n_in_values: Vec<usize>,
    pub fixed_point: FixedPointSpec,
    #[serde(skip)]
    pub kind: Command,
}

fn flag(key: &str) -> String {
    format!("--{}", key.replace('_', "-"))
}

fn resolve_preset(
    name: &str,
    custom: &BTreeMap<String, PerturbationModel>,
) -> kdewatch::Result<PerturbationModel> {
    match custom.get(name) {
        Some(m) => m.validate().map(|_| *m),
        None => PerturbationModel::preset(name),
    }
}

fn toml_scalar(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Turns a library validation error into a usage error keyed by flag.
fn keyed(err: kdewatch::Error) -> UsageError {
    match err {
        kdewatch::Error::InvalidParameter { name, reason } => {
            let key = match name {
                "bandwidth" => "sigma_kernel",
                "quantizer_bits" | "input_bits" => "bits",
                other => other,
            };
            UsageError::new(flag(key), reason)
        }
        kdewatch::Error::UnknownPreset(name) => {
            UsageError::new("--perturb-preset", format!("unknown preset `{name}`"))
        }
        kdewatch::Error::UnknownAxis(name) => UsageError::new("--axis", format!("unknown axis `{name}`")),
        kdewatch::Error::InvalidDistribution(msg) => UsageError::new("--distribution", msg),
        other => UsageError::new("config", other),
    }
}

pub fn parse_config(cli: &Cli) -> Result<RunConfig, UsageError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    resolve(cli.command, &cli.common, &file)
}

/// Flags override file values, which override defaults.
pub fn resolve(command: Command, args: &CommonArgs, file: &FileConfig) -> Result<RunConfig, UsageError> {
    macro_rules! pick {
        ($field:ident, $default:expr) => {
            args.$field
                .clone()
                .or_else(|| file.$field.clone())
                .unwrap_or_else(|| $default)
        };
    }

    let normalization = match (args.normalization, file.normalization.as_deref()) {
        (Some(NormalizationArg::Proper), _) => Normalization::ProperDensity,
        (Some(NormalizationArg::Unscaled), _) => Normalization::Unscaled,
        (None, None | Some("proper")) => Normalization::ProperDensity,
        (None, Some("paper" | "unscaled")) => Normalization::Unscaled,
        (None, Some(other)) => {
            return Err(UsageError::new(
                "--normalization",
                format!("`{other}` is not one of proper, unscaled"),
            ))
        }
    };

    let sigma_kernel = pick!(sigma_kernel, 0.05);
    let kernel = KernelSpec::gaussian(sigma_kernel)
        .map_err(keyed)?
        .with_normalization(normalization);

    let preset_name = args
        .perturb_preset
        .clone()
        .or_else(|| file.perturb_preset.clone());
    let perturbation = match &preset_name {
        Some(name) => resolve_preset(name, &file.presets).map_err(keyed)?,
        None => file.perturbation.unwrap_or(PerturbationModel::NONE),
    };

    let detector = DetectorConfig {
        n_in: pick!(n_in, 10),
        kernel,
        p_thres: pick!(p_thres, 1e-4),
        quantizer_bits: pick!(bits, 4),
        noise_sigma: pick!(noise_sigma, 0.0),
        perturbation,
        warmup: WarmupPolicy::AcceptFirstN,
        seed: pick!(seed, 0),
    };
    detector.validate().map_err(keyed)?;

    let default_trials = match command {
        Command::RmseStudy => 100,
        Command::DigitalCompare => 10,
        _ => 1,
    };
    let trials = pick!(trials, default_trials);
    if trials == 0 {
        return Err(UsageError::new("--trials", "must be at least 1"));
    }

    let mut axes: Vec<SweepAxis> = Vec::new();
    let custom = &file.presets;
    let mut add_axis = |name: &str, values: &str| -> Result<(), UsageError> {
        let axis = SweepAxis::parse(name, values, |p| resolve_preset(p, custom)).map_err(|e| match e {
            kdewatch::Error::UnknownAxis(n) => UsageError::new("--axis", format!("unknown axis `{n}`")),
            other => UsageError::new("--axis", other),
        })?;
        axes.retain(|a| a.name() != axis.name());
        axes.push(axis);
        Ok(())
    };
    for (name, values) in &file.axes {
        let joined: Vec<String> = values.iter().map(toml_scalar).collect();
        add_axis(name, &joined.join(","))?;
    }
    for spec in &args.axes {
        let (name, values) = spec
            .split_once('=')
            .ok_or_else(|| UsageError::new("--axis", format!("`{spec}` is not NAME=V1,V2,...")))?;
        add_axis(name, values)?;
    }

    let distribution: Distribution = match args.distribution.as_ref().or(file.distribution.as_ref()) {
        Some(text) => text.parse().map_err(keyed)?,
        None => Distribution::unimodal_reference(),
    };

    let anomaly_rate = pick!(anomaly_rate, 0.01);
    if !(0.0..1.0).contains(&anomaly_rate) {
        return Err(UsageError::new("--anomaly-rate", "must be in [0, 1)"));
    }
    let anomaly_offset = pick!(anomaly_offset, 0.4);
    if !anomaly_offset.is_finite() {
        return Err(UsageError::new("--anomaly-offset", "must be finite"));
    }
    let length = pick!(length, 1000);
    if length == 0 {
        return Err(UsageError::new("--length", "must be at least 1"));
    }
    let n_in_values = pick!(n_in_values, vec![5, 10, 20, 50, 100]);
    if n_in_values.is_empty() || n_in_values.contains(&0) {
        return Err(UsageError::new("--n-in-values", "window sizes must be positive"));
    }

    let input_bits = if command == Command::DigitalCompare {
        args.bits.or(file.bits).unwrap_or(8)
    } else {
        detector.quantizer_bits
    };
    let fixed_point =
        FixedPointSpec::new(input_bits, pick!(lut_bits, 16), pick!(lut_value_bits, 16)).map_err(keyed)?;

    let input = args.input.clone().or_else(|| file.input.clone());
    match (&input, command) {
        (None, Command::Detect | Command::Sweep) => {
            return Err(UsageError::new("--input", "required for this command"));
        }
        (Some(path), _) if !path.exists() => {
            return Err(UsageError::new(
                "--input",
                format!("{} does not exist", path.display()),
            ));
        }
        _ => {}
    }

    Ok(RunConfig {
        command: command.name(),
        detector,
        perturb_preset: preset_name,
        input,
        output_dir: pick!(output_dir, PathBuf::from(".")),
        value_column: pick!(value_column, DEFAULT_VALUE_COLUMN.to_string()),
        label_column: pick!(label_column, DEFAULT_LABEL_COLUMN.to_string()),
        trials,
        ignore_warmup: pick!(ignore_warmup, true),
        axes,
        distribution,
        length,
        anomaly_rate,
        anomaly_offset,
        n_in_values,
        fixed_point,
        kind: command,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve_synth(args: CommonArgs, file: &str) -> Result<RunConfig, UsageError> {
        resolve(Command::Synth, &args, &FileConfig::parse(file).unwrap())
    }

    #[test]
    fn documented_defaults() {
        let cfg = resolve_synth(CommonArgs::default(), "").unwrap();
        assert_eq!(cfg.detector.n_in, 10);
        assert_eq!(cfg.detector.kernel.bandwidth, 0.05);
        assert_eq!(cfg.detector.p_thres, 1e-4);
        assert_eq!(cfg.detector.quantizer_bits, 4);
        assert_eq!(cfg.detector.kernel.normalization, Normalization::ProperDensity);
        assert!(cfg.ignore_warmup);
        assert_eq!(cfg.trials, 1);
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let file = "n_in = 20\nsigma_kernel = 0.08\n";
        let args = CommonArgs {
            n_in: Some(7),
            ..CommonArgs::default()
        };
        let cfg = resolve_synth(args, file).unwrap();
        assert_eq!(cfg.detector.n_in, 7);
        assert_eq!(cfg.detector.kernel.bandwidth, 0.08);
    }

    #[test]
    fn out_of_range_values_name_their_key() {
        let args = CommonArgs {
            p_thres: Some(0.0),
            ..CommonArgs::default()
        };
        assert_eq!(resolve_synth(args, "").unwrap_err().key, "--p-thres");
        let args = CommonArgs {
            bits: Some(0),
            ..CommonArgs::default()
        };
        assert_eq!(resolve_synth(args, "").unwrap_err().key, "--bits");
        let args = CommonArgs {
            sigma_kernel: Some(-1.0),
            ..CommonArgs::default()
        };
        assert_eq!(resolve_synth(args, "").unwrap_err().key, "--sigma-kernel");
        assert_eq!(
            resolve_synth(CommonArgs::default(), "n_in = 0").unwrap_err().key,
            "--n-in"
        );
    }

    #[test]
    fn input_must_exist() {
        let args = CommonArgs {
            input: Some(PathBuf::from("/definitely/not/here.csv")),
            ..CommonArgs::default()
        };
        let err = resolve(Command::Detect, &args, &FileConfig::default()).unwrap_err();
        assert_eq!(err.key, "--input");
        let err = resolve(Command::Detect, &CommonArgs::default(), &FileConfig::default()).unwrap_err();
        assert_eq!(err.key, "--input");
    }

    #[test]
    fn axes_merge_file_then_flags() {
        let file = "[axes]\np_thres = [1e-5, 1e-4]\nn_in = [5, 10]\n";
        let args = CommonArgs {
            axes: vec!["n_in=3,4,5".into(), "perturbation=none,vth-15mv".into()],
            ..CommonArgs::default()
        };
        let cfg = resolve_synth(args, file).unwrap();
        let names: Vec<_> = cfg.axes.iter().map(|a| a.name()).collect();
        assert_eq!(names, ["p_thres", "n_in", "perturbation"]);
        assert_eq!(cfg.axes[1], SweepAxis::NIn(vec![3, 4, 5]));

        let args = CommonArgs {
            axes: vec!["window=1".into()],
            ..CommonArgs::default()
        };
        assert_eq!(resolve_synth(args, "").unwrap_err().key, "--axis");
    }

    #[test]
    fn custom_presets_from_file() {
        let file = r#"
perturb_preset = "lab"

[presets.lab]
mu_offset_sigma = 0.02
width_scale_sigma = 0.1
"#;
        let cfg = resolve_synth(CommonArgs::default(), file).unwrap();
        assert_eq!(cfg.detector.perturbation.mu_offset_sigma, 0.02);
        assert!(!cfg.detector.perturbation.resample_each_step);
        assert_eq!(cfg.perturb_preset.as_deref(), Some("lab"));

        let args = CommonArgs {
            perturb_preset: Some("temp-90c".into()),
            ..CommonArgs::default()
        };
        let cfg = resolve_synth(args, file).unwrap();
        assert!(cfg.detector.perturbation.resample_each_step);

        let args = CommonArgs {
            perturb_preset: Some("nope".into()),
            ..CommonArgs::default()
        };
        assert_eq!(resolve_synth(args, "").unwrap_err().key, "--perturb-preset");
    }

    #[test]
    fn normalization_aliases() {
        let cfg = resolve_synth(CommonArgs::default(), "normalization = \"paper\"").unwrap();
        assert_eq!(cfg.detector.kernel.normalization, Normalization::Unscaled);
        assert!(resolve_synth(CommonArgs::default(), "normalization = \"other\"").is_err());
        assert!(FileConfig::parse("unknown_key = 1").is_err());
    }

    #[test]
    fn digital_compare_word_size() {
        let cfg = resolve(
            Command::DigitalCompare,
            &CommonArgs::default(),
            &FileConfig::default(),
        )
        .unwrap();
        assert_eq!(cfg.fixed_point, FixedPointSpec::new(8, 16, 16).unwrap());
        assert_eq!(cfg.detector.quantizer_bits, 4);
    }
}
