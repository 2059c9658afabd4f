//! Cartesian parameter sweeps over a labeled series.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use super::{score, LabeledSeries};
use crate::detector::{run_series, DetectorConfig};
use crate::error::{Error, Result};
use crate::nonideality::PerturbationModel;
use crate::seed::derive_seed;
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedPerturbation {
    pub name: String,
    pub model: PerturbationModel,
}

/// One swept parameter and its values.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "axis", content = "values", rename_all = "snake_case")]
pub enum SweepAxis {
    PThres(Vec<f64>),
    SigmaKernel(Vec<f64>),
    NIn(Vec<usize>),
    QuantizerBits(Vec<u32>),
    NoiseSigma(Vec<f64>),
    Perturbation(Vec<NamedPerturbation>),
}

fn parse_list<T: std::str::FromStr>(axis: &str, values: &str) -> Result<Vec<T>> {
    values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<T>()
                .map_err(|_| Error::invalid("axis", format!("`{v}` is not a valid value for `{axis}`")))
        })
        .collect()
}

impl SweepAxis {
    /// Parses `name` and a comma-separated value list. Perturbation values
    /// are preset names, resolved with `resolve`.
    pub fn parse(
        name: &str,
        values: &str,
        resolve: impl Fn(&str) -> Result<PerturbationModel>,
    ) -> Result<Self> {
        let key = name.trim().replace('-', "_");
        let axis = match key.as_str() {
            "p_thres" => SweepAxis::PThres(parse_list(name, values)?),
            "sigma_kernel" => SweepAxis::SigmaKernel(parse_list(name, values)?),
            "n_in" => SweepAxis::NIn(parse_list(name, values)?),
            "quantizer_bits" | "bits" => SweepAxis::QuantizerBits(parse_list(name, values)?),
            "noise_sigma" => SweepAxis::NoiseSigma(parse_list(name, values)?),
            "perturbation" | "perturb_preset" => SweepAxis::Perturbation(
                values
                    .split(',')
                    .map(|v| {
                        let v = v.trim();
                        Ok(NamedPerturbation {
                            name: v.to_string(),
                            model: resolve(v)?,
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(Error::UnknownAxis(name.to_string())),
        };
        if axis.is_empty() {
            return Err(Error::invalid("axis", format!("`{name}` has no values")));
        }
        Ok(axis)
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::PThres(_) => "p_thres",
            SweepAxis::SigmaKernel(_) => "sigma_kernel",
            SweepAxis::NIn(_) => "n_in",
            SweepAxis::QuantizerBits(_) => "quantizer_bits",
            SweepAxis::NoiseSigma(_) => "noise_sigma",
            SweepAxis::Perturbation(_) => "perturbation",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepAxis::PThres(v) | SweepAxis::SigmaKernel(v) | SweepAxis::NoiseSigma(v) => v.len(),
            SweepAxis::NIn(v) => v.len(),
            SweepAxis::QuantizerBits(v) => v.len(),
            SweepAxis::Perturbation(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Applies value `i` to `config`, returning its display form.
    fn apply(&self, i: usize, config: &mut DetectorConfig) -> String {
        match self {
            SweepAxis::PThres(v) => {
                config.p_thres = v[i];
                v[i].to_string()
            }
            SweepAxis::SigmaKernel(v) => {
                config.kernel.bandwidth = v[i];
                v[i].to_string()
            }
            SweepAxis::NIn(v) => {
                config.n_in = v[i];
                v[i].to_string()
            }
            SweepAxis::QuantizerBits(v) => {
                config.quantizer_bits = v[i];
                v[i].to_string()
            }
            SweepAxis::NoiseSigma(v) => {
                config.noise_sigma = v[i];
                v[i].to_string()
            }
            SweepAxis::Perturbation(v) => {
                config.perturbation = v[i].model;
                v[i].name.clone()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepOptions {
    pub trials: usize,
    pub seed: u64,
    pub ignore_warmup: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            trials: 1,
            seed: 0,
            ignore_warmup: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub cell: usize,
    /// Axis values in axis order, as displayed.
    pub params: Vec<String>,
    pub n_anomalies: usize,
    pub mean_f1: f64,
    pub mean_standard_f1: f64,
    pub mean_false_negatives: f64,
    pub mean_false_positives: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub axes: Vec<&'static str>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn best(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .fold(None, |best: Option<&SweepRow>, r| match best {
                Some(b) if b.mean_f1 >= r.mean_f1 => Some(b),
                _ => Some(r),
            })
    }

    pub fn to_table(&self) -> Table {
        let mut header: Vec<String> = self.axes.iter().map(|a| a.to_string()).collect();
        header.extend(
            [
                "n_anomalies",
                "mean_f1",
                "mean_standard_f1",
                "mean_false_negatives",
                "mean_false_positives",
            ]
            .map(String::from),
        );
        let mut t = Table::new(header);
        for r in &self.rows {
            let mut row = r.params.clone();
            row.extend([
                r.n_anomalies.to_string(),
                r.mean_f1.to_string(),
                r.mean_standard_f1.to_string(),
                r.mean_false_negatives.to_string(),
                r.mean_false_positives.to_string(),
            ]);
            t.push_row(row);
        }
        t
    }
}

/// Mixed-radix decomposition of a cell index, last axis fastest.
fn cell_coordinates(mut cell: usize, axes: &[SweepAxis]) -> Vec<usize> {
    let mut coords = vec![0; axes.len()];
    for (slot, axis) in coords.iter_mut().zip(axes).rev() {
        *slot = cell % axis.len();
        cell /= axis.len();
    }
    coords
}

fn run_cell(
    cell: usize,
    series: &LabeledSeries,
    base: &DetectorConfig,
    axes: &[SweepAxis],
    options: &SweepOptions,
) -> Result<SweepRow> {
    let mut config = *base;
    let params: Vec<String> = cell_coordinates(cell, axes)
        .into_iter()
        .zip(axes)
        .map(|(i, axis)| axis.apply(i, &mut config))
        .collect();
    config.validate()?;

    let mut f1 = 0.0;
    let mut standard_f1 = 0.0;
    let mut fn_total = 0.0;
    let mut fp_total = 0.0;
    let mut n_anomalies = 0;
    for trial in 0..options.trials {
        config.seed = derive_seed(options.seed, &[cell as u64, trial as u64]);
        let results = run_series(&config, &series.values)?;
        let m = score(&results, &series.labels, options.ignore_warmup)?;
        f1 += m.f1;
        standard_f1 += m.standard_f1;
        fn_total += m.false_negatives as f64;
        fp_total += m.false_positives as f64;
        n_anomalies = m.n_anomalies;
    }
    let t = options.trials as f64;
    Ok(SweepRow {
        cell,
        params,
        n_anomalies,
        mean_f1: f1 / t,
        mean_standard_f1: standard_f1 / t,
        mean_false_negatives: fn_total / t,
        mean_false_positives: fp_total / t,
    })
}

/// Runs detection and scoring for every cell of the Cartesian product of
/// `axes`, averaging over `options.trials` seeded trials per cell.
pub fn sweep(
    series: &LabeledSeries,
    base: &DetectorConfig,
    axes: &[SweepAxis],
    options: &SweepOptions,
) -> Result<SweepTable> {
    base.validate()?;
    if options.trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    for (i, a) in axes.iter().enumerate() {
        if a.is_empty() {
            return Err(Error::invalid("axis", format!("`{}` has no values", a.name())));
        }
        if axes[..i].iter().any(|b| b.name() == a.name()) {
            return Err(Error::invalid("axis", format!("`{}` given twice", a.name())));
        }
    }
    let cells: usize = axes.iter().map(SweepAxis::len).product();

    #[cfg(feature = "parallel")]
    let rows = (0..cells)
        .into_par_iter()
        .map(|c| run_cell(c, series, base, axes, options))
        .collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let rows = (0..cells)
        .map(|c| run_cell(c, series, base, axes, options))
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepTable {
        axes: axes.iter().map(SweepAxis::name).collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::Distribution;
    use crate::eval::synth_series;

    fn series() -> LabeledSeries {
        synth_series(&Distribution::unimodal_reference(), 300, 0.02, 0.4, 3).unwrap()
    }

    #[test]
    fn threshold_grid_has_five_rows() {
        let axes =
            [SweepAxis::parse("p_thres", "1e-5,1e-4,1e-3,1e-2,1e-1", PerturbationModel::preset).unwrap()];
        let t = sweep(
            &series(),
            &DetectorConfig::default(),
            &axes,
            &SweepOptions::default(),
        )
        .unwrap();
        assert_eq!(t.rows.len(), 5);
        assert_eq!(t.axes, vec!["p_thres"]);
        assert_eq!(t.rows[0].params, vec!["0.00001"]);
        assert_eq!(t.to_table().rows.len(), 5);
    }

    #[test]
    fn bandwidth_grid_has_five_rows() {
        let axes = [SweepAxis::parse(
            "sigma_kernel",
            "0.02,0.04,0.06,0.08,0.1",
            PerturbationModel::preset,
        )
        .unwrap()];
        let t = sweep(
            &series(),
            &DetectorConfig::default(),
            &axes,
            &SweepOptions::default(),
        )
        .unwrap();
        assert_eq!(t.rows.len(), 5);
        assert_eq!(t.rows[4].params, vec!["0.1"]);
    }

    #[test]
    fn empty_axes_is_single_base_cell() {
        let s = series();
        let t = sweep(&s, &DetectorConfig::default(), &[], &SweepOptions::default()).unwrap();
        assert_eq!(t.rows.len(), 1);
        let direct = score(
            &run_series(&DetectorConfig::default(), &s.values).unwrap(),
            &s.labels,
            true,
        )
        .unwrap();
        assert_eq!(t.rows[0].mean_f1, direct.f1);
    }

    #[test]
    fn cell_count_is_product_and_order_is_row_major() {
        let axes = [
            SweepAxis::NIn(vec![5, 10]),
            SweepAxis::QuantizerBits(vec![3, 4, 8]),
            SweepAxis::Perturbation(vec![
                NamedPerturbation {
                    name: "none".into(),
                    model: PerturbationModel::NONE,
                },
                NamedPerturbation {
                    name: "vth-15mv".into(),
                    model: PerturbationModel::preset("vth-15mv").unwrap(),
                },
            ]),
        ];
        let opts = SweepOptions {
            trials: 2,
            seed: 8,
            ignore_warmup: true,
        };
        let t = sweep(&series(), &DetectorConfig::default(), &axes, &opts).unwrap();
        assert_eq!(t.rows.len(), 12);
        assert_eq!(t.rows[0].params, vec!["5", "3", "none"]);
        assert_eq!(t.rows[1].params, vec!["5", "3", "vth-15mv"]);
        assert_eq!(t.rows[11].params, vec!["10", "8", "vth-15mv"]);
        assert_eq!(
            sweep(&series(), &DetectorConfig::default(), &axes, &opts).unwrap(),
            t
        );
    }

    #[test]
    fn axis_errors() {
        assert!(matches!(
            SweepAxis::parse("window", "1,2", PerturbationModel::preset),
            Err(Error::UnknownAxis(_))
        ));
        assert!(SweepAxis::parse("n_in", "1,x", PerturbationModel::preset).is_err());
        assert!(matches!(
            SweepAxis::parse("perturbation", "none,nope", PerturbationModel::preset),
            Err(Error::UnknownPreset(_))
        ));
        let dup = [SweepAxis::NIn(vec![5]), SweepAxis::NIn(vec![6])];
        assert!(sweep(
            &series(),
            &DetectorConfig::default(),
            &dup,
            &SweepOptions::default()
        )
        .is_err());
        let bad = [SweepAxis::PThres(vec![0.0])];
        assert!(sweep(
            &series(),
            &DetectorConfig::default(),
            &bad,
            &SweepOptions::default()
        )
        .is_err());
    }
}
