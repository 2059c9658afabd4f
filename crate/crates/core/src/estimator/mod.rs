//! Kernel density estimates over a sample window.

mod digital;
mod study;

pub use digital::{build_exp_lut, fixed_point_pdf, scaled_fixed_point_pdf, FixedPointSpec};
pub use study::{rmse_study, unit_grid, RmseRow, RmseStudy, RMSE_GRID_POINTS};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{gaussian, sigmoid, KernelFamily, KernelSpec, Normalization};

/// Density values sampled on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCurve {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl DensityCurve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        check_grid(&grid)?;
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(
                "values",
                format!("density value {v} is not finite and non-negative"),
            ));
        }
        Ok(Self { grid, values })
    }

    /// Tabulates an arbitrary density function on `grid`.
    pub fn from_fn(grid: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.to_vec(), grid.iter().map(|&x| f(x)).collect())
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Indices of strict interior local maxima.
    pub fn local_maxima(&self) -> Vec<usize> {
        (1..self.values.len().saturating_sub(1))
            .filter(|&i| self.values[i] > self.values[i - 1] && self.values[i] >= self.values[i + 1])
            .collect()
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if let Some(x) = grid.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(*x));
    }
    for (i, pair) in grid.windows(2).enumerate() {
        if pair[1] <= pair[0] {
            return Err(Error::UnsortedGrid(i + 1));
        }
    }
    Ok(())
}

fn require_family(spec: &KernelSpec, family: KernelFamily, operation: &'static str) -> Result<()> {
    spec.validate()?;
    if spec.family != family {
        return Err(Error::WrongFamily {
            found: spec.family,
            operation,
        });
    }
    Ok(())
}

/// `Σ k((x - x_i)/h)` over the window, summed in window order.
#[inline]
pub(crate) fn gaussian_sum(window: &[f64], bandwidth: f64, x: f64) -> f64 {
    window.iter().map(|&xi| gaussian((x - xi) / bandwidth)).sum()
}

/// Applies the `1/N` (and, for proper densities, `1/h`) factor to a kernel sum.
#[inline]
pub(crate) fn normalize_sum(sum: f64, n: usize, bandwidth: f64, normalization: Normalization) -> f64 {
    match normalization {
        Normalization::ProperDensity => sum / (n as f64 * bandwidth),
        Normalization::Unscaled => sum / n as f64,
    }
}

/// Gaussian KDE of `window` evaluated at `x`.
pub fn estimate_pdf(window: &[f64], spec: &KernelSpec, x: f64) -> Result<f64> {
    require_family(spec, KernelFamily::GaussianPdf, "PDF estimation")?;
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    let sum = gaussian_sum(window, spec.bandwidth, x);
    Ok(normalize_sum(
        sum,
        window.len(),
        spec.bandwidth,
        spec.normalization,
    ))
}

pub fn estimate_pdf_grid(window: &[f64], spec: &KernelSpec, grid: &[f64]) -> Result<DensityCurve> {
    require_family(spec, KernelFamily::GaussianPdf, "PDF estimation")?;
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    check_grid(grid)?;
    let values = grid
        .iter()
        .map(|&x| estimate_pdf(window, spec, x))
        .collect::<Result<Vec<_>>>()?;
    DensityCurve::new(grid.to_vec(), values)
}

/// Sigmoid-kernel CDF estimate, `(1/N) Σ σ((x - x_i)/h)`.
pub fn estimate_cdf(window: &[f64], spec: &KernelSpec, x: f64) -> Result<f64> {
    require_family(spec, KernelFamily::SigmoidCdf, "CDF estimation")?;
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if x.is_nan() {
        return Err(Error::NonFinite(x));
    }
    let sum: f64 = window.iter().map(|&xi| sigmoid((x - xi) / spec.bandwidth)).sum();
    Ok(sum / window.len() as f64)
}

/// Root-mean-square difference between two curves on the same grid.
pub fn avg_rmse(estimated: &DensityCurve, truth: &DensityCurve) -> Result<f64> {
    if estimated.grid != truth.grid {
        return Err(Error::GridMismatch);
    }
    if estimated.is_empty() {
        return Ok(0.0);
    }
    let ss: f64 = estimated
        .values
        .iter()
        .zip(&truth.values)
        .map(|(e, t)| (e - t) * (e - t))
        .sum();
    Ok((ss / estimated.len() as f64).sqrt())
}
