//! Kernel functions and bandwidth selection.
//!
//! Two families are supported: the standard normal density for PDF
//! estimation and the logistic sigmoid for CDF estimation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `sqrt(2π)`.
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    GaussianPdf,
    SigmoidCdf,
}

/// Whether the `1/h` factor of a kernel density estimate is applied.
///
/// `ProperDensity` yields a density that integrates to one. `Unscaled`
/// sums raw kernel heights averaged over the window, so its values are
/// `h` times smaller and thresholds must be chosen accordingly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    ProperDensity,
    Unscaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub bandwidth: f64,
    #[serde(default)]
    pub normalization: Normalization,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, bandwidth: f64, normalization: Normalization) -> Result<Self> {
        let spec = Self {
            family,
            bandwidth,
            normalization,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Gaussian PDF kernel with proper density normalization.
    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        Self::new(KernelFamily::GaussianPdf, bandwidth, Normalization::ProperDensity)
    }

    pub fn sigmoid(bandwidth: f64) -> Result<Self> {
        Self::new(KernelFamily::SigmoidCdf, bandwidth, Normalization::ProperDensity)
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(Error::invalid(
                "bandwidth",
                format!("must be a positive finite number, got {}", self.bandwidth),
            ));
        }
        Ok(())
    }

    /// Kernel value at the already-scaled argument `u = (x - x_i) / h`.
    pub fn eval(&self, u: f64) -> Result<f64> {
        eval_kernel(self.family, u)
    }
}

/// Standard normal density, `exp(-u²/2) / sqrt(2π)`.
#[inline]
pub fn gaussian(u: f64) -> f64 {
    (-0.5 * u * u).exp() / SQRT_2PI
}

/// Logistic sigmoid, `1 / (1 + exp(-u))`.
#[inline]
pub fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

pub fn eval_kernel(family: KernelFamily, u: f64) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::NonFinite(u));
    }
    Ok(match family {
        KernelFamily::GaussianPdf => gaussian(u),
        KernelFamily::SigmoidCdf => sigmoid(u),
    })
}

/// Sample standard deviation with the `N - 1` denominator.
pub fn sample_std(samples: &[f64]) -> Option<f64> {
    if samples.len() < 2 {
        return None;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    Some((ss / (n - 1.0)).sqrt())
}

/// Rule-of-thumb bandwidth `1.06 · σ̂ · N^(-1/5)`.
///
/// This is a helper only; the detector never applies it on its own.
pub fn rule_of_thumb_bandwidth(samples: &[f64]) -> Result<f64> {
    if let Some(bad) = samples.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(*bad));
    }
    let std = sample_std(samples).ok_or(Error::UndefinedBandwidth("need at least two samples"))?;
    if samples.iter().all(|&x| x == samples[0]) || std <= 0.0 {
        return Err(Error::UndefinedBandwidth("samples have zero variance"));
    }
    Ok(1.06 * std * (samples.len() as f64).powf(-0.2))
}
