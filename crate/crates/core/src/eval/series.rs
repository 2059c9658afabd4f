use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::table::Table;

pub const DEFAULT_VALUE_COLUMN: &str = "value";
pub const DEFAULT_LABEL_COLUMN: &str = "is_anomaly";

/// A labeled time series, min-max normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledSeries {
    pub name: String,
    pub values: Vec<f64>,
    /// `true` marks an anomaly.
    pub labels: Vec<bool>,
    pub raw_min: f64,
    pub raw_max: f64,
}

impl LabeledSeries {
    /// Normalizes `raw` with its own minimum and maximum.
    pub fn from_raw(name: impl Into<String>, raw: &[f64], labels: Vec<bool>) -> Result<Self> {
        if raw.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: raw.len(),
                right: labels.len(),
            });
        }
        if raw.is_empty() {
            return Err(Error::invalid("series", "no data rows"));
        }
        if let Some(v) = raw.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(*v));
        }
        let min = raw.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max <= min {
            return Err(Error::invalid("series", "constant series cannot be normalized"));
        }
        let span = max - min;
        let values = raw.iter().map(|v| ((v - min) / span).clamp(0.0, 1.0)).collect();
        Ok(Self {
            name: name.into(),
            values,
            labels,
            raw_min: min,
            raw_max: max,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_anomalies(&self) -> usize {
        self.labels.iter().filter(|l| **l).count()
    }

    /// Number of maximal runs of consecutive anomaly labels.
    pub fn anomaly_segments(&self) -> usize {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(i, &l)| l && (i == 0 || !self.labels[i - 1]))
            .count()
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["index", DEFAULT_VALUE_COLUMN, DEFAULT_LABEL_COLUMN]);
        for (i, (v, l)) in self.values.iter().zip(&self.labels).enumerate() {
            t.push_row([i.to_string(), v.to_string(), u8::from(*l).to_string()]);
        }
        t
    }
}

fn parse_label(text: &str) -> Option<bool> {
    match text.trim() {
        "0" | "0.0" | "false" | "False" => Some(false),
        "1" | "1.0" | "true" | "True" => Some(true),
        _ => None,
    }
}

/// Reads a comma-separated series with a header row. Lines starting with
/// `#` are ignored.
pub fn read_series<R: Read>(
    reader: R,
    name: &str,
    value_column: &str,
    label_column: &str,
) -> Result<LabeledSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let column = |wanted: &str| {
        headers
            .iter()
            .position(|h| h == wanted)
            .ok_or_else(|| Error::Parse {
                row: 1,
                message: format!(
                    "missing column `{wanted}` (found: {})",
                    headers.iter().collect::<Vec<_>>().join(", ")
                ),
            })
    };
    let value_idx = column(value_column)?;
    let label_idx = column(label_column)?;

    let mut raw = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let field = |idx: usize| {
            record.get(idx).ok_or_else(|| Error::Parse {
                row,
                message: "row has too few fields".into(),
            })
        };
        let value_text = field(value_idx)?;
        let value: f64 = value_text.parse().map_err(|_| Error::Parse {
            row,
            message: format!("`{value_text}` is not a number"),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                row,
                message: format!("`{value_text}` is not finite"),
            });
        }
        let label_text = field(label_idx)?;
        let label = parse_label(label_text).ok_or_else(|| Error::Parse {
            row,
            message: format!("label `{label_text}` is not 0/1"),
        })?;
        raw.push(value);
        labels.push(label);
    }
    if raw.is_empty() {
        return Err(Error::Parse {
            row: 1,
            message: "file has no data rows".into(),
        });
    }
    LabeledSeries::from_raw(name, &raw, labels)
}

pub fn load_series(path: &Path, value_column: &str, label_column: &str) -> Result<LabeledSeries> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_series(file, &name, value_column, label_column)
}

/// Writes the normalized representation with optional comment lines.
pub fn write_series<W: Write>(series: &LabeledSeries, comments: &[String], out: W) -> Result<()> {
    let mut table = series.to_table();
    table.comments = comments.to_vec();
    table.write_to(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn read(text: &str) -> Result<LabeledSeries> {
        read_series(text.as_bytes(), "t", "value", "is_anomaly")
    }

    #[test]
    fn normalizes_endpoints_and_midpoint() {
        let s = read("timestamp,value,is_anomaly\n1,10,0\n2,20,1\n3,30,0\n").unwrap();
        assert_eq!(s.values, vec![0.0, 0.5, 1.0]);
        assert_eq!(s.labels, vec![false, true, false]);
        assert_eq!((s.raw_min, s.raw_max), (10.0, 30.0));
        assert_eq!(s.n_anomalies(), 1);
    }

    #[test]
    fn custom_columns_and_comments() {
        let text = "# produced elsewhere\nx,flag\n1.0,false\n3.0,true\n";
        let s = read_series(text.as_bytes(), "t", "x", "flag").unwrap();
        assert_eq!(s.values, vec![0.0, 1.0]);
        assert_eq!(s.labels, vec![false, true]);
    }

    #[test]
    fn error_rows_are_reported() {
        let err = read("value,is_anomaly\n1,0\nabc,0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }), "{err:?}");
        let err = read("value,is_anomaly\n1,0\n2,7\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }), "{err:?}");
        let err = read("value,label\n1,0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, .. }));
        assert!(read("value,is_anomaly\n").is_err());
        assert!(read("").is_err());
        assert!(read("value,is_anomaly\n4,0\n4,1\n").is_err());
    }

    #[test]
    fn segments_count_runs() {
        let s = LabeledSeries::from_raw(
            "s",
            &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            vec![true, true, false, true, false, true],
        )
        .unwrap();
        assert_eq!(s.n_anomalies(), 4);
        assert_eq!(s.anomaly_segments(), 3);
    }

    proptest! {
        #[test]
        fn write_then_load_is_lossless(
            raw in proptest::collection::vec(-1e6f64..1e6, 2..60),
            flags in proptest::collection::vec(any::<bool>(), 60),
        ) {
            let labels = flags[..raw.len()].to_vec();
            if let Ok(series) = LabeledSeries::from_raw("p", &raw, labels) {
                let mut buf = Vec::new();
                write_series(&series, &["config".to_string()], &mut buf).unwrap();
                let back = read_series(buf.as_slice(), "p", "value", "is_anomaly").unwrap();
                prop_assert_eq!(&back.values, &series.values);
                prop_assert_eq!(&back.labels, &series.labels);
            }
        }
    }
}
