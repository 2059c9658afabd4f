//! Dataset handling, scoring and parameter sweeps.

mod benchmark;
mod metrics;
mod series;
mod sweep;
mod synth;

pub use benchmark::{match_reference_series, SeriesMatch, CANDIDATE_FILES, REFERENCE_SERIES};
pub use metrics::{score, Metrics};
pub use series::{
    load_series, read_series, write_series, LabeledSeries, DEFAULT_LABEL_COLUMN, DEFAULT_VALUE_COLUMN,
};
pub use sweep::{sweep, NamedPerturbation, SweepAxis, SweepOptions, SweepRow, SweepTable};
pub use synth::synth_series;
