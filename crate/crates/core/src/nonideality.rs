//! Software models of mixed-signal imperfections: stored-sample
//! quantization, additive input noise, and per-kernel parameter
//! deviations standing in for process and temperature variation.

use rand::Rng;
use rand_distr::{Distribution as _, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::normalize_sum;
use crate::kernels::{gaussian, KernelFamily, KernelSpec, Normalization};

pub const MAX_QUANTIZER_BITS: u32 = 16;
const UNIT_TOLERANCE: f64 = 1e-9;
/// Lower clamp for drawn width and amplitude factors.
pub const FACTOR_FLOOR: f64 = 0.05;

fn check_bits(bits: u32) -> Result<()> {
    if !(1..=MAX_QUANTIZER_BITS).contains(&bits) {
        return Err(Error::invalid(
            "quantizer_bits",
            format!("must be in [1, {MAX_QUANTIZER_BITS}], got {bits}"),
        ));
    }
    Ok(())
}

fn levels(bits: u32) -> f64 {
    ((1u32 << bits) - 1) as f64
}

/// `round(value · (2^bits - 1))`, rounding half away from zero.
pub fn quantize(value: f64, bits: u32) -> Result<u32> {
    check_bits(bits)?;
    if !value.is_finite() {
        return Err(Error::NonFinite(value));
    }
    if !(-UNIT_TOLERANCE..=1.0 + UNIT_TOLERANCE).contains(&value) {
        return Err(Error::OutOfUnitRange { value });
    }
    Ok((value.clamp(0.0, 1.0) * levels(bits)).round() as u32)
}

pub fn dequantize(code: u32, bits: u32) -> Result<f64> {
    check_bits(bits)?;
    if code > (1u32 << bits) - 1 {
        return Err(Error::CodeOutOfRange {
            code: code as u64,
            bits,
        });
    }
    Ok(code as f64 / levels(bits))
}

/// Adds `N(0, sigma²)` noise and clamps to `[0, 1]`. `sigma = 0` is a no-op
/// and consumes no randomness.
pub fn add_noise<R: Rng + ?Sized>(value: f64, sigma: f64, rng: &mut R) -> Result<f64> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid("noise_sigma", "must be finite and non-negative"));
    }
    if sigma == 0.0 {
        return Ok(value);
    }
    let noise = Normal::new(0.0, sigma).expect("checked sigma").sample(rng);
    Ok((value + noise).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerturbationModel {
    #[serde(default)]
    pub mu_offset_sigma: f64,
    #[serde(default)]
    pub width_scale_sigma: f64,
    #[serde(default)]
    pub amplitude_scale_sigma: f64,
    #[serde(default)]
    pub resample_each_step: bool,
}

/// Built-in perturbation bundles. The magnitudes are illustrative choices
/// that degrade detection noticeably at small bandwidths; they are not
/// derived from any circuit characterization.
pub const PRESETS: &[(&str, PerturbationModel)] = &[
    ("none", PerturbationModel::NONE),
    (
        "vth-15mv",
        PerturbationModel {
            mu_offset_sigma: 0.01,
            width_scale_sigma: 0.1,
            amplitude_scale_sigma: 0.1,
            resample_each_step: false,
        },
    ),
    (
        "temp-90c",
        PerturbationModel {
            mu_offset_sigma: 0.008,
            width_scale_sigma: 0.06,
            amplitude_scale_sigma: 0.0,
            resample_each_step: true,
        },
    ),
    (
        "vth-15mv+temp-90c",
        PerturbationModel {
            mu_offset_sigma: 0.0128,
            width_scale_sigma: 0.1166,
            amplitude_scale_sigma: 0.1,
            resample_each_step: true,
        },
    ),
];

impl PerturbationModel {
    pub const NONE: Self = Self {
        mu_offset_sigma: 0.0,
        width_scale_sigma: 0.0,
        amplitude_scale_sigma: 0.0,
        resample_each_step: false,
    };

    pub fn preset(name: &str) -> Result<Self> {
        PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, m)| *m)
            .ok_or_else(|| Error::UnknownPreset(name.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mu_offset_sigma", self.mu_offset_sigma),
            ("width_scale_sigma", self.width_scale_sigma),
            ("amplitude_scale_sigma", self.amplitude_scale_sigma),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and non-negative, got {v}"),
                ));
            }
        }
        Ok(())
    }

    pub fn is_null(&self) -> bool {
        self.mu_offset_sigma == 0.0 && self.width_scale_sigma == 0.0 && self.amplitude_scale_sigma == 0.0
    }

    /// Draws one kernel's deviation: center offset, then width factor, then
    /// amplitude factor.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> KernelDeviation {
        let offset = Normal::new(0.0, self.mu_offset_sigma)
            .expect("validated")
            .sample(rng);
        let width = Normal::new(1.0, self.width_scale_sigma)
            .expect("validated")
            .sample(rng);
        let amplitude = Normal::new(1.0, self.amplitude_scale_sigma)
            .expect("validated")
            .sample(rng);
        KernelDeviation {
            offset,
            width: width.max(FACTOR_FLOOR),
            amplitude: amplitude.max(FACTOR_FLOOR),
        }
    }

    pub fn draw_many<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<KernelDeviation> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

/// Realized parameter error of one kernel cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelDeviation {
    pub offset: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl KernelDeviation {
    pub const IDEAL: Self = Self {
        offset: 0.0,
        width: 1.0,
        amplitude: 1.0,
    };
}

/// Density with explicit per-kernel deviations; `deviations[i]` applies to
/// `window[i]`. With ideal deviations this is bit-identical to
/// [`crate::estimator::estimate_pdf`].
pub fn perturbed_pdf_with(
    window: &[f64],
    spec: &KernelSpec,
    deviations: &[KernelDeviation],
    x: f64,
) -> Result<f64> {
    spec.validate()?;
    if spec.family != KernelFamily::GaussianPdf {
        return Err(Error::WrongFamily {
            found: spec.family,
            operation: "perturbed PDF estimation",
        });
    }
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if deviations.len() < window.len() {
        return Err(Error::LengthMismatch {
            left: window.len(),
            right: deviations.len(),
        });
    }
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    let h = spec.bandwidth;
    let sum: f64 = window
        .iter()
        .zip(deviations)
        .map(|(&xi, d)| {
            let height = d.amplitude * gaussian((x - xi - d.offset) / (h * d.width));
            match spec.normalization {
                Normalization::ProperDensity => height / d.width,
                Normalization::Unscaled => height,
            }
        })
        .sum();
    Ok(normalize_sum(sum, window.len(), h, spec.normalization))
}

/// Density with fresh deviations drawn from `model` for every window entry.
pub fn perturbed_pdf<R: Rng + ?Sized>(
    window: &[f64],
    spec: &KernelSpec,
    model: &PerturbationModel,
    x: f64,
    rng: &mut R,
) -> Result<f64> {
    model.validate()?;
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let deviations = model.draw_many(window.len(), rng);
    perturbed_pdf_with(window, spec, &deviations, x)
}
