//! Streaming outlier detector over a sliding window of validated inliers.
//!
//! Each incoming sample is scored against a Gaussian KDE built from the
//! `n_in` most recent inliers. Samples whose likelihood falls below the
//! threshold are flagged and never enter the window; inliers replace the
//! earliest-arrived window entry.
//!
//! Stored window entries are quantized codes (the sample bank); the
//! incoming sample is compared at full precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::nonideality::{
    add_noise, dequantize, perturbed_pdf_with, quantize, KernelDeviation, PerturbationModel,
    MAX_QUANTIZER_BITS,
};
use crate::seed::{rng_from, StreamRng};

/// Fixed-capacity FIFO of quantizer codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowState {
    capacity: usize,
    codes: Vec<u32>,
    /// Slot holding the earliest-arrived entry once the window is full.
    cursor: usize,
}

impl WindowState {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "window capacity must be positive");
        Self {
            capacity,
            codes: Vec::with_capacity(capacity),
            cursor: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.codes.len() == self.capacity
    }

    /// Codes in slot order.
    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn insert_cursor(&self) -> usize {
        self.cursor
    }

    /// Inserts `code`, returning the slot it was written to.
    pub fn push(&mut self, code: u32) -> usize {
        if self.codes.len() < self.capacity {
            self.codes.push(code);
            self.codes.len() - 1
        } else {
            let slot = self.cursor;
            self.codes[slot] = code;
            self.cursor = (self.cursor + 1) % self.capacity;
            slot
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarmupPolicy {
    /// The first `n_in` samples are accepted unconditionally.
    #[default]
    AcceptFirstN,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub n_in: usize,
    pub kernel: KernelSpec,
    pub p_thres: f64,
    pub quantizer_bits: u32,
    pub noise_sigma: f64,
    pub perturbation: PerturbationModel,
    pub warmup: WarmupPolicy,
    pub seed: u64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            n_in: 10,
            kernel: KernelSpec::gaussian(0.05).expect("positive bandwidth"),
            p_thres: 1e-4,
            quantizer_bits: 4,
            noise_sigma: 0.0,
            perturbation: PerturbationModel::NONE,
            warmup: WarmupPolicy::AcceptFirstN,
            seed: 0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_in == 0 {
            return Err(Error::invalid("n_in", "must be at least 1"));
        }
        self.kernel.validate()?;
        if self.kernel.family != crate::kernels::KernelFamily::GaussianPdf {
            return Err(Error::WrongFamily {
                found: self.kernel.family,
                operation: "outlier detection",
            });
        }
        if !(self.p_thres.is_finite() && self.p_thres > 0.0) {
            return Err(Error::invalid(
                "p_thres",
                format!("must be positive, got {}", self.p_thres),
            ));
        }
        if !(1..=MAX_QUANTIZER_BITS).contains(&self.quantizer_bits) {
            return Err(Error::invalid(
                "quantizer_bits",
                format!(
                    "must be in [1, {MAX_QUANTIZER_BITS}], got {}",
                    self.quantizer_bits
                ),
            ));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::invalid("noise_sigma", "must be finite and non-negative"));
        }
        self.perturbation.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Inlier,
    Outlier,
    Warmup,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Inlier => "inlier",
            Label::Outlier => "outlier",
            Label::Warmup => "warmup",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionResult {
    pub index: usize,
    /// Input value as supplied.
    pub value: f64,
    /// `P_sample` against the window as it stood before this step.
    pub likelihood: f64,
    pub label: Label,
    /// Whether `likelihood < p_thres`; meaningful for warmup samples too.
    pub below_threshold: bool,
}

/// Single-owner detector state.
#[derive(Debug, Clone)]
pub struct Detector {
    config: DetectorConfig,
    window: WindowState,
    /// Dequantized window contents, slot-aligned with `window.codes()`.
    values: Vec<f64>,
    /// Per-slot kernel deviations. Ideal unless a perturbation is configured.
    deviations: Vec<KernelDeviation>,
    rng: StreamRng,
    steps: usize,
}

impl Detector {
    pub fn new(config: DetectorConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = rng_from(config.seed);
        let deviations = if config.perturbation.resample_each_step {
            vec![KernelDeviation::IDEAL; config.n_in]
        } else {
            config.perturbation.draw_many(config.n_in, &mut rng)
        };
        Ok(Self {
            config,
            window: WindowState::new(config.n_in),
            values: Vec::with_capacity(config.n_in),
            deviations,
            rng,
            steps: 0,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn window(&self) -> &WindowState {
        &self.window
    }

    /// Dequantized window contents in slot order.
    pub fn window_values(&self) -> &[f64] {
        &self.values
    }

    pub fn deviations(&self) -> &[KernelDeviation] {
        &self.deviations
    }

    /// Changes the decision threshold without touching the window.
    pub fn set_threshold(&mut self, p_thres: f64) -> Result<()> {
        let updated = DetectorConfig {
            p_thres,
            ..self.config
        };
        updated.validate()?;
        self.config = updated;
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Likelihood of `x` under the current window model, without updating it.
    pub fn likelihood(&self, x: f64) -> Result<f64> {
        if self.values.is_empty() {
            return Ok(0.0);
        }
        perturbed_pdf_with(&self.values, &self.config.kernel, &self.deviations, x)
    }

    pub fn step(&mut self, value: f64) -> Result<DetectionResult> {
        if !value.is_finite() {
            return Err(Error::NonFinite(value));
        }
        let cfg = self.config;
        let observed = add_noise(value.clamp(0.0, 1.0), cfg.noise_sigma, &mut self.rng)?;

        if cfg.perturbation.resample_each_step {
            for d in &mut self.deviations {
                *d = cfg.perturbation.draw(&mut self.rng);
            }
        }
        let likelihood = self.likelihood(observed)?;
        let below_threshold = likelihood < cfg.p_thres;

        let label = if self.steps < cfg.n_in {
            Label::Warmup
        } else if below_threshold {
            Label::Outlier
        } else {
            Label::Inlier
        };
        if label != Label::Outlier {
            let code = quantize(observed, cfg.quantizer_bits)?;
            let slot = self.window.push(code);
            let v = dequantize(code, cfg.quantizer_bits)?;
            if slot == self.values.len() {
                self.values.push(v);
            } else {
                self.values[slot] = v;
            }
        }
        let result = DetectionResult {
            index: self.steps,
            value,
            likelihood,
            label,
            below_threshold,
        };
        self.steps += 1;
        Ok(result)
    }
}

/// Runs a fresh detector over `series`.
pub fn run_series(config: &DetectorConfig, series: &[f64]) -> Result<Vec<DetectionResult>> {
    let mut detector = Detector::new(*config)?;
    series
        .iter()
        .enumerate()
        .map(|(index, &v)| {
            detector.step(v).map_err(|e| Error::AtIndex {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}
