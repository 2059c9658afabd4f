use serde::Serialize;

use super::{avg_rmse, estimate_pdf_grid, DensityCurve};
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::seed::{derive_seed, rng_from};

/// Number of uniform points on `[0, 1]` used for ground-truth comparisons.
pub const RMSE_GRID_POINTS: usize = 256;

pub fn unit_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| i as f64 / (points - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmseRow {
    pub n_in: usize,
    pub mean_rmse: f64,
    /// Sample standard deviation across trials (0 for a single trial).
    pub std_rmse: f64,
    pub trials: usize,
}

impl RmseRow {
    pub fn standard_error(&self) -> f64 {
        self.std_rmse / (self.trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmseStudy {
    pub rows: Vec<RmseRow>,
    pub truth: DensityCurve,
    /// Estimated curve from the first trial of each window size, in row order.
    pub first_trial_curves: Vec<DensityCurve>,
}

/// Average RMSE of the learned density against the analytic truth as a
/// function of window size, averaged over Monte-Carlo trials.
pub fn rmse_study(
    truth_dist: &Distribution,
    n_in_values: &[usize],
    trials: usize,
    spec: &KernelSpec,
    seed: u64,
) -> Result<RmseStudy> {
    truth_dist.validate()?;
    spec.validate()?;
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    if n_in_values.contains(&0) {
        return Err(Error::invalid("n_in", "window sizes must be at least 1"));
    }
    let grid = unit_grid(RMSE_GRID_POINTS);
    let truth = DensityCurve::from_fn(&grid, |x| truth_dist.pdf(x))?;

    let mut rows = Vec::with_capacity(n_in_values.len());
    let mut first_trial_curves = Vec::with_capacity(n_in_values.len());
    for (row_idx, &n_in) in n_in_values.iter().enumerate() {
        let mut errors = Vec::with_capacity(trials);
        for trial in 0..trials {
            let mut rng = rng_from(derive_seed(seed, &[row_idx as u64, trial as u64]));
            let window: Vec<f64> = (0..n_in).map(|_| truth_dist.sample(&mut rng)).collect();
            let estimate = estimate_pdf_grid(&window, spec, &grid)?;
            errors.push(avg_rmse(&estimate, &truth)?);
            if trial == 0 {
                first_trial_curves.push(estimate);
            }
        }
        let mean = errors.iter().sum::<f64>() / trials as f64;
        let std = if trials > 1 {
            (errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (trials - 1) as f64).sqrt()
        } else {
            0.0
        };
        rows.push(RmseRow {
            n_in,
            mean_rmse: mean,
            std_rmse: std,
            trials,
        });
    }
    Ok(RmseStudy {
        rows,
        truth,
        first_trial_curves,
    })
}
