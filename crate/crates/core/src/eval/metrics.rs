use serde::Serialize;

use crate::detector::{DetectionResult, Label};
use crate::error::{Error, Result};

/// Detection counts and scores.
///
/// `f1` is `N_A / (N_A + (F_N + F_P)/2)`, which uses the total anomaly count
/// in the numerator. `standard_f1` is the usual `2TP / (2TP + F_N + F_P)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub n_anomalies: usize,
    pub true_positives: usize,
    pub false_negatives: usize,
    pub false_positives: usize,
    pub f1: f64,
    pub standard_f1: f64,
    /// False when there were no anomalies and no false positives; both
    /// scores are then reported as 1.
    pub f1_defined: bool,
}

impl Metrics {
    pub fn from_counts(n_anomalies: usize, false_negatives: usize, false_positives: usize) -> Self {
        assert!(false_negatives <= n_anomalies, "more misses than anomalies");
        let true_positives = n_anomalies - false_negatives;
        let errors = (false_negatives + false_positives) as f64;
        let defined = n_anomalies + false_positives > 0;
        let (f1, standard_f1) = if defined {
            let na = n_anomalies as f64;
            let tp = true_positives as f64;
            let standard = if 2.0 * tp + errors > 0.0 {
                2.0 * tp / (2.0 * tp + errors)
            } else {
                1.0
            };
            (na / (na + 0.5 * errors), standard)
        } else {
            (1.0, 1.0)
        };
        Self {
            n_anomalies,
            true_positives,
            false_negatives,
            false_positives,
            f1,
            standard_f1,
            f1_defined: defined,
        }
    }
}

/// Scores detector output against ground-truth labels.
///
/// With `ignore_warmup`, warmup samples never count as false positives,
/// while anomalies inside the warmup still count as missed. Without it,
/// warmup samples are judged by whether their likelihood fell below the
/// threshold.
pub fn score(results: &[DetectionResult], labels: &[bool], ignore_warmup: bool) -> Result<Metrics> {
    if results.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: results.len(),
            right: labels.len(),
        });
    }
    let mut n_anomalies = 0;
    let mut false_negatives = 0;
    let mut false_positives = 0;
    for (r, &anomaly) in results.iter().zip(labels) {
        n_anomalies += usize::from(anomaly);
        let flagged = match r.label {
            Label::Outlier => true,
            Label::Inlier => false,
            Label::Warmup if ignore_warmup => {
                false_negatives += usize::from(anomaly);
                continue;
            }
            Label::Warmup => r.below_threshold,
        };
        match (anomaly, flagged) {
            (true, false) => false_negatives += 1,
            (false, true) => false_positives += 1,
            _ => {}
        }
    }
    Ok(Metrics::from_counts(
        n_anomalies,
        false_negatives,
        false_positives,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn result(index: usize, label: Label, below_threshold: bool) -> DetectionResult {
        DetectionResult {
            index,
            value: 0.5,
            likelihood: if below_threshold { 0.0 } else { 1.0 },
            label,
            below_threshold,
        }
    }

    #[test]
    fn golden_values() {
        let m = Metrics::from_counts(8, 1, 0);
        assert!((m.f1 - 0.9412).abs() < 1e-4);
        assert_eq!(m.f1, 8.0 / 8.5);
        assert_eq!(Metrics::from_counts(10, 0, 0).f1, 1.0);
        assert_eq!(Metrics::from_counts(5, 0, 1).f1, 5.0 / 5.5);
        let empty = Metrics::from_counts(0, 0, 0);
        assert_eq!(empty.f1, 1.0);
        assert!(!empty.f1_defined);
        let only_fp = Metrics::from_counts(0, 0, 3);
        assert_eq!(only_fp.f1, 0.0);
        assert!(only_fp.f1_defined);
    }

    #[test]
    fn standard_f1_uses_true_positives() {
        let m = Metrics::from_counts(8, 1, 0);
        assert_eq!(m.true_positives, 7);
        assert_eq!(m.standard_f1, 14.0 / 15.0);
    }

    #[test]
    fn counts_from_results() {
        let results = vec![
            result(0, Label::Warmup, true),
            result(1, Label::Warmup, true),
            result(2, Label::Inlier, false),
            result(3, Label::Outlier, true),
            result(4, Label::Outlier, true),
            result(5, Label::Inlier, false),
        ];
        let labels = vec![true, false, false, true, false, true];
        let m = score(&results, &labels, true).unwrap();
        assert_eq!((m.n_anomalies, m.false_negatives, m.false_positives), (3, 2, 1));
        let m = score(&results, &labels, false).unwrap();
        assert_eq!((m.n_anomalies, m.false_negatives, m.false_positives), (3, 1, 2));
    }

    #[test]
    fn all_normal_labels() {
        let results: Vec<_> = (0..5).map(|i| result(i, Label::Inlier, false)).collect();
        let m = score(&results, &[false; 5], true).unwrap();
        assert_eq!(m.n_anomalies, 0);
        assert!(!m.f1_defined);
    }

    #[test]
    fn length_mismatch() {
        let results = vec![result(0, Label::Inlier, false)];
        assert!(matches!(
            score(&results, &[], true),
            Err(Error::LengthMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn flipping_a_normal_row_adds_one_false_positive(
            decisions in proptest::collection::vec(any::<bool>(), 1..80),
            anomalies in proptest::collection::vec(any::<bool>(), 80),
            pick in any::<proptest::sample::Index>(),
        ) {
            let labels = &anomalies[..decisions.len()];
            let results: Vec<_> = decisions
                .iter()
                .enumerate()
                .map(|(i, &out)| result(i, if out { Label::Outlier } else { Label::Inlier }, out))
                .collect();
            let candidates: Vec<usize> = (0..results.len())
                .filter(|&i| !labels[i] && results[i].label == Label::Inlier)
                .collect();
            if candidates.is_empty() || !labels.iter().any(|l| *l) {
                return Ok(());
            }
            let i = candidates[pick.index(candidates.len())];
            let before = score(&results, labels, true).unwrap();
            let mut flipped = results.clone();
            flipped[i] = result(i, Label::Outlier, true);
            let after = score(&flipped, labels, true).unwrap();
            prop_assert_eq!(after.false_positives, before.false_positives + 1);
            prop_assert!(after.f1 < before.f1);
        }

        #[test]
        fn f1_monotone_in_error_count(na in 1usize..100, fn_ in 0usize..100, fp in 0usize..100, extra in 1usize..20) {
            let fn_ = fn_.min(na);
            let base = Metrics::from_counts(na, fn_, fp).f1;
            prop_assert!(Metrics::from_counts(na, fn_, fp + extra).f1 < base);
            if fn_ < na {
                prop_assert!(Metrics::from_counts(na, fn_ + 1, fp).f1 < base);
            }
        }
    }
}
