//! Browser bindings for kdewatch.
//!
//! Each operation has a plain Rust entry point returning JSON, which the
//! `#[wasm_bindgen]` exports wrap.

use kdewatch::detector::{run_series, DetectorConfig};
use kdewatch::distribution::Distribution;
use kdewatch::estimator::{estimate_pdf_grid, unit_grid};
use kdewatch::eval::{score, sweep, synth_series, SweepAxis, SweepOptions};
use kdewatch::kernels::{KernelSpec, Normalization};
use kdewatch::nonideality::PerturbationModel;
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct DemoParams {
    pub distribution: String,
    pub length: usize,
    pub anomaly_rate: f64,
    pub anomaly_offset: f64,
    pub seed: u64,
    pub n_in: usize,
    pub sigma_kernel: f64,
    pub p_thres: f64,
    pub bits: u32,
    pub noise_sigma: f64,
    pub perturb_preset: String,
    pub unscaled: bool,
}

impl Default for DemoParams {
    fn default() -> Self {
        let d = DetectorConfig::default();
        Self {
            distribution: Distribution::unimodal_reference().to_string(),
            length: 400,
            anomaly_rate: 0.02,
            anomaly_offset: 0.4,
            seed: 1,
            n_in: d.n_in,
            sigma_kernel: d.kernel.bandwidth,
            p_thres: d.p_thres,
            bits: d.quantizer_bits,
            noise_sigma: 0.0,
            perturb_preset: "none".into(),
            unscaled: false,
        }
    }
}

impl DemoParams {
    fn normalization(&self) -> Normalization {
        if self.unscaled {
            Normalization::Unscaled
        } else {
            Normalization::ProperDensity
        }
    }

    fn detector(&self) -> kdewatch::Result<DetectorConfig> {
        let config = DetectorConfig {
            n_in: self.n_in,
            kernel: KernelSpec::gaussian(self.sigma_kernel)?.with_normalization(self.normalization()),
            p_thres: self.p_thres,
            quantizer_bits: self.bits,
            noise_sigma: self.noise_sigma,
            perturbation: PerturbationModel::preset(&self.perturb_preset)?,
            seed: self.seed,
            ..DetectorConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

fn parse_params(json: &str) -> Result<DemoParams, String> {
    if json.trim().is_empty() {
        return Ok(DemoParams::default());
    }
    serde_json::from_str(json).map_err(|e| format!("bad parameters: {e}"))
}

fn to_json(value: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct CurveOut {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// Density estimate of a comma- or whitespace-separated window on `[0, 1]`.
pub fn density_curve_json(
    window: &str,
    bandwidth: f64,
    unscaled: bool,
    points: usize,
) -> Result<String, String> {
    let samples: Vec<f64> = window
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("`{s}` is not a number")))
        .collect::<Result<_, _>>()?;
    let norm = if unscaled {
        Normalization::Unscaled
    } else {
        Normalization::ProperDensity
    };
    let spec = KernelSpec::gaussian(bandwidth)
        .map_err(|e| e.to_string())?
        .with_normalization(norm);
    let curve =
        estimate_pdf_grid(&samples, &spec, &unit_grid(points.clamp(2, 2048))).map_err(|e| e.to_string())?;
    to_json(&CurveOut {
        grid: curve.grid().to_vec(),
        values: curve.values().to_vec(),
    })
}

#[derive(Debug, Serialize)]
pub struct DetectOut {
    pub values: Vec<f64>,
    pub labels: Vec<bool>,
    pub likelihood: Vec<f64>,
    pub verdict: Vec<&'static str>,
    pub n_anomalies: usize,
    pub f1: f64,
    pub standard_f1: f64,
    pub false_negatives: usize,
    pub false_positives: usize,
}

/// Generates a synthetic series and runs the detector over it.
pub fn detect_json(params: &str) -> Result<String, String> {
    let p = parse_params(params)?;
    let dist: Distribution = p
        .distribution
        .parse()
        .map_err(|e: kdewatch::Error| e.to_string())?;
    let series =
        synth_series(&dist, p.length, p.anomaly_rate, p.anomaly_offset, p.seed).map_err(|e| e.to_string())?;
    let config = p.detector().map_err(|e| e.to_string())?;
    let results = run_series(&config, &series.values).map_err(|e| e.to_string())?;
    let m = score(&results, &series.labels, true).map_err(|e| e.to_string())?;
    to_json(&DetectOut {
        likelihood: results.iter().map(|r| r.likelihood).collect(),
        verdict: results.iter().map(|r| r.label.as_str()).collect(),
        values: series.values,
        labels: series.labels,
        n_anomalies: m.n_anomalies,
        f1: m.f1,
        standard_f1: m.standard_f1,
        false_negatives: m.false_negatives,
        false_positives: m.false_positives,
    })
}

#[derive(Debug, Serialize)]
pub struct SweepOut {
    pub sigma_kernel: Vec<f64>,
    pub p_thres: Vec<f64>,
    /// Row-major: `f1[i * p_thres.len() + j]`.
    pub f1: Vec<f64>,
}

/// f1 over a σ_kernel × P_thres grid on a synthetic series.
pub fn sweep_json(params: &str, sigmas: &str, thresholds: &str) -> Result<String, String> {
    let p = parse_params(params)?;
    let dist: Distribution = p
        .distribution
        .parse()
        .map_err(|e: kdewatch::Error| e.to_string())?;
    let series =
        synth_series(&dist, p.length, p.anomaly_rate, p.anomaly_offset, p.seed).map_err(|e| e.to_string())?;
    let config = p.detector().map_err(|e| e.to_string())?;
    let none = |_: &str| Ok(PerturbationModel::NONE);
    let axes = vec![
        SweepAxis::parse("sigma_kernel", sigmas, none).map_err(|e| e.to_string())?,
        SweepAxis::parse("p_thres", thresholds, none).map_err(|e| e.to_string())?,
    ];
    let options = SweepOptions {
        seed: p.seed,
        ..SweepOptions::default()
    };
    let table = sweep(&series, &config, &axes, &options).map_err(|e| e.to_string())?;
    let (SweepAxis::SigmaKernel(s), SweepAxis::PThres(t)) = (&axes[0], &axes[1]) else {
        unreachable!("axes parsed by name")
    };
    to_json(&SweepOut {
        sigma_kernel: s.clone(),
        p_thres: t.clone(),
        f1: table.rows.iter().map(|r| r.mean_f1).collect(),
    })
}

#[wasm_bindgen]
pub fn density_curve(window: &str, bandwidth: f64, unscaled: bool, points: usize) -> Result<String, JsValue> {
    density_curve_json(window, bandwidth, unscaled, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn detect(params: &str) -> Result<String, JsValue> {
    detect_json(params).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sweep_grid(params: &str, sigmas: &str, thresholds: &str) -> Result<String, JsValue> {
    sweep_json(params, sigmas, thresholds).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn curve_peaks_at_the_sample() {
        let out = parse(&density_curve_json("0.5", 0.05, false, 101).unwrap());
        let values = out["values"].as_array().unwrap();
        assert_eq!(values.len(), 101);
        assert!((values[50].as_f64().unwrap() - 7.978845608028653).abs() < 1e-12);
        assert!(density_curve_json("0.5, x", 0.05, false, 10).is_err());
        assert!(density_curve_json("", 0.05, false, 10).is_err());
    }

    #[test]
    fn detect_defaults_find_the_spikes() {
        let out = parse(&detect_json("").unwrap());
        assert_eq!(out["values"].as_array().unwrap().len(), 400);
        assert!(out["n_anomalies"].as_u64().unwrap() > 0);
        assert_eq!(out["f1"].as_f64().unwrap(), 1.0);
    }

    #[test]
    fn detect_rejects_bad_parameters() {
        assert!(detect_json(r#"{"p_thres": 0}"#).is_err());
        assert!(detect_json(r#"{"perturb_preset": "nope"}"#).is_err());
        assert!(detect_json("{").is_err());
    }

    #[test]
    fn sweep_is_a_full_grid() {
        let out = parse(&sweep_json(r#"{"noise_sigma": 0.02}"#, "0.02,0.05,0.1", "1e-4,1e-2").unwrap());
        assert_eq!(out["f1"].as_array().unwrap().len(), 6);
    }
}
