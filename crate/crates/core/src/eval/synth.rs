use rand::Rng;

use super::LabeledSeries;
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::seed::rng_from;

/// Generates a labeled surrogate stream.
///
/// Every point is drawn from `descriptor`. With probability `anomaly_rate`
/// it is then shifted by `+anomaly_offset` or `-anomaly_offset` (sign chosen
/// at random) and labeled anomalous. Values are clamped to `[0, 1]`; the
/// series is already in normalized units, so `raw_min = 0`, `raw_max = 1`.
pub fn synth_series(
    descriptor: &Distribution,
    length: usize,
    anomaly_rate: f64,
    anomaly_offset: f64,
    seed: u64,
) -> Result<LabeledSeries> {
    descriptor.validate()?;
    if length == 0 {
        return Err(Error::invalid("length", "must be at least 1"));
    }
    if !(0.0..1.0).contains(&anomaly_rate) {
        return Err(Error::invalid(
            "anomaly_rate",
            format!("must be in [0, 1), got {anomaly_rate}"),
        ));
    }
    if !anomaly_offset.is_finite() {
        return Err(Error::NonFinite(anomaly_offset));
    }
    let mut rng = rng_from(seed);
    let mut values = Vec::with_capacity(length);
    let mut labels = Vec::with_capacity(length);
    for _ in 0..length {
        let base = descriptor.sample(&mut rng);
        let anomalous = rng.random::<f64>() < anomaly_rate;
        let value = if anomalous {
            if rng.random::<bool>() {
                base + anomaly_offset
            } else {
                base - anomaly_offset
            }
        } else {
            base
        };
        values.push(value.clamp(0.0, 1.0));
        labels.push(anomalous);
    }
    Ok(LabeledSeries {
        name: format!("synth-{descriptor}"),
        values,
        labels,
        raw_min: 0.0,
        raw_max: 1.0,
    })
}
