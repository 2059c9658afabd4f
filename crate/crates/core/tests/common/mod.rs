#![allow(dead_code)]

use kdewatch::detector::{DetectorConfig, Label};

// sqrt(2π) correctly rounded; computing it as (2.0 * PI).sqrt() is one ulp low.
const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

/// Direct re-derivation of the detector: a plain list of accepted values
/// replaced round-robin, and the kernel sum written out longhand.
pub struct NaiveDetector {
    n_in: usize,
    bandwidth: f64,
    proper: bool,
    p_thres: f64,
    levels: f64,
    inliers: Vec<f64>,
    accepted: usize,
    seen: usize,
}

impl NaiveDetector {
    pub fn new(cfg: &DetectorConfig) -> Self {
        Self {
            n_in: cfg.n_in,
            bandwidth: cfg.kernel.bandwidth,
            proper: cfg.kernel.normalization == kdewatch::kernels::Normalization::ProperDensity,
            p_thres: cfg.p_thres,
            levels: ((1u32 << cfg.quantizer_bits) - 1) as f64,
            inliers: Vec::new(),
            accepted: 0,
            seen: 0,
        }
    }

    fn stored(&self, v: f64) -> f64 {
        (v * self.levels).round() / self.levels
    }

    pub fn density(&self, x: f64) -> f64 {
        if self.inliers.is_empty() {
            return 0.0;
        }
        let mut sum = 0.0;
        for &xi in &self.inliers {
            let u = (x - xi) / self.bandwidth;
            sum += (-0.5 * u * u).exp() / SQRT_TWO_PI;
        }
        if self.proper {
            sum / (self.inliers.len() as f64 * self.bandwidth)
        } else {
            sum / self.inliers.len() as f64
        }
    }

    fn accept(&mut self, v: f64) {
        let s = self.stored(v);
        if self.inliers.len() < self.n_in {
            self.inliers.push(s);
        } else {
            let slot = (self.accepted - self.n_in) % self.n_in;
            self.inliers[slot] = s;
        }
        self.accepted += 1;
    }

    pub fn step(&mut self, v: f64) -> (f64, Label) {
        let v = v.clamp(0.0, 1.0);
        let p = self.density(v);
        let label = if self.seen < self.n_in {
            Label::Warmup
        } else if p < self.p_thres {
            Label::Outlier
        } else {
            Label::Inlier
        };
        if label != Label::Outlier {
            self.accept(v);
        }
        self.seen += 1;
        (p, label)
    }

    pub fn inliers(&self) -> &[f64] {
        &self.inliers
    }
}
