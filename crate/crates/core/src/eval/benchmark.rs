//! Identification of the five reference Yahoo A1 series by their
//! anomaly and length counts.

use serde::Serialize;

use super::LabeledSeries;

/// `(anomaly count, length)` of reference series 1 to 5.
pub const REFERENCE_SERIES: [(usize, usize); 5] = [(8, 1439), (5, 1423), (13, 1439), (10, 1439), (44, 1440)];

/// File names of the candidate series, in the order they are usually cited.
pub const CANDIDATE_FILES: [&str; 5] = ["real_4", "real_6", "real_10", "real_15", "real_42"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesMatch {
    /// 1-based reference series number.
    pub reference: usize,
    pub candidate: Option<usize>,
    pub name: Option<String>,
    /// Whether anomalies were counted as labeled points or as labeled runs.
    pub counted_by: Option<&'static str>,
}

/// Assigns each reference series to a distinct candidate with matching
/// length and anomaly count. Point counts are tried before run counts.
pub fn match_reference_series(candidates: &[LabeledSeries]) -> Vec<SeriesMatch> {
    let mut used = vec![false; candidates.len()];
    REFERENCE_SERIES
        .iter()
        .enumerate()
        .map(|(i, &(anomalies, length))| {
            let by_points = |s: &LabeledSeries| s.n_anomalies() == anomalies;
            let by_runs = |s: &LabeledSeries| s.anomaly_segments() == anomalies;
            let mut found = None;
            for (how, test) in [
                ("points", &by_points as &dyn Fn(&LabeledSeries) -> bool),
                ("segments", &by_runs),
            ] {
                if let Some(j) = (0..candidates.len())
                    .find(|&j| !used[j] && candidates[j].len() == length && test(&candidates[j]))
                {
                    found = Some((j, how));
                    break;
                }
            }
            if let Some((j, _)) = found {
                used[j] = true;
            }
            SeriesMatch {
                reference: i + 1,
                candidate: found.map(|(j, _)| j),
                name: found.map(|(j, _)| candidates[j].name.clone()),
                counted_by: found.map(|(_, how)| how),
            }
        })
        .collect()
}
