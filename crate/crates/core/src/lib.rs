//! Streaming outlier detection with sliding-window kernel density estimation.
//!
//! A [`detector::Detector`] keeps the `n_in` most recent inliers as
//! quantized kernel centers. Each new sample is scored by its Gaussian KDE
//! likelihood and flagged when the likelihood drops below a threshold;
//! accepted samples replace the oldest window entry.
//!
//! Around the detector sit:
//!
//! - [`kernels`]: Gaussian and sigmoid kernels, rule-of-thumb bandwidth.
//! - [`estimator`]: PDF/CDF estimates, RMSE against analytic densities, and
//!   an integer subtract/square/LUT/accumulate reference pipeline.
//! - [`nonideality`]: quantization, additive noise and per-kernel
//!   parameter perturbation.
//! - [`eval`]: series loading, scoring, synthetic data and parameter sweeps.
//!
//! ```
//! use kdewatch::detector::{run_series, DetectorConfig, Label};
//!
//! let mut series = vec![0.4; 30];
//! series[20] = 0.95;
//! let results = run_series(&DetectorConfig::default(), &series).unwrap();
//! assert_eq!(results[20].label, Label::Outlier);
//! assert_eq!(results[21].label, Label::Inlier);
//! ```

pub mod detector;
pub mod distribution;
pub mod error;
pub mod estimator;
pub mod eval;
pub mod kernels;
pub mod nonideality;
pub mod seed;
pub mod table;

pub use error::{Error, Result};
