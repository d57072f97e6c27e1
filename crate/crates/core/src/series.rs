//! Univariate time series container, summary statistics and train/test split.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("series is empty")]
    EmptySeries,
    #[error("series has {len} observation(s); at least 2 are required")]
    TooShort { len: usize },
    #[error("non-finite value at position {index}")]
    NonFiniteValue { index: usize },
    #[error("{labels} labels supplied for {values} values")]
    LabelMismatch { values: usize, labels: usize },
    #[error("invalid test size k={k} for a series of length {len} (need 1 <= k < len)")]
    InvalidK { k: usize, len: usize },
}

/// Ordered real observations with optional timestamp labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self, SeriesError> {
        Self::build(values, None)
    }

    pub fn with_labels(values: Vec<f64>, labels: Vec<String>) -> Result<Self, SeriesError> {
        Self::build(values, Some(labels))
    }

    fn build(values: Vec<f64>, labels: Option<Vec<String>>) -> Result<Self, SeriesError> {
        match values.len() {
            0 => return Err(SeriesError::EmptySeries),
            1 => return Err(SeriesError::TooShort { len: 1 }),
            _ => {}
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeriesError::NonFiniteValue { index });
        }
        if let Some(l) = &labels {
            if l.len() != values.len() {
                return Err(SeriesError::LabelMismatch {
                    values: values.len(),
                    labels: l.len(),
                });
            }
        }
        Ok(Self { values, labels })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels
            .as_ref()
            .and_then(|l| l.get(index))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn summary(&self) -> SummaryStats {
        // length >= 2 is a type invariant
        summarize(&self.values).expect("non-empty series")
    }

    /// Applies `f` to every value, keeping labels.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self, SeriesError> {
        Self::build(
            self.values.iter().map(|&v| f(v)).collect(),
            self.labels.clone(),
        )
    }
}

/// Population summary statistics (standard deviation divides by n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub std_dev: f64,
    pub max: f64,
    pub min: f64,
}

pub fn summarize(values: &[f64]) -> Result<SummaryStats, SeriesError> {
    if values.is_empty() {
        return Err(SeriesError::EmptySeries);
    }
    // summing in sorted order makes the result independent of input order
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = mean(&sorted);
    let std_dev = population_std(&sorted);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    // rounding in the mean can push it a hair outside [min, max] for constant input
    let mean = mean.clamp(min, max);
    Ok(SummaryStats {
        mean,
        std_dev,
        max,
        min,
    })
}

/// Arithmetic mean summed in a fixed order. Returns NaN for empty input.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation (divide by n). Returns NaN for empty input.
pub fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / values.len() as f64).sqrt()
}

/// A series cut into a leading training block and a trailing test block.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSeries {
    pub train: TimeSeries,
    pub test: TimeSeries,
    /// 0-based index of the last training observation.
    pub split_index: usize,
}

impl SplitSeries {
    pub fn concat(&self) -> TimeSeries {
        let mut values = self.train.values.clone();
        values.extend_from_slice(&self.test.values);
        let labels = match (&self.train.labels, &self.test.labels) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        TimeSeries::build(values, labels).expect("parts of a valid series")
    }
}

/// Holds out the final `k` observations as the test block.
///
/// Both halves are returned as raw slices wrapped in `TimeSeries`; a single
/// observation on either side is allowed even though `TimeSeries::new` would
/// reject it, since the split is only a view over a validated parent.
pub fn split_last_k(series: &TimeSeries, k: usize) -> Result<SplitSeries, SeriesError> {
    let len = series.len();
    if k == 0 || k >= len {
        return Err(SeriesError::InvalidK { k, len });
    }
    let cut = len - k;
    let part = |range: std::ops::Range<usize>| TimeSeries {
        values: series.values[range.clone()].to_vec(),
        labels: series.labels.as_ref().map(|l| l[range].to_vec()),
    };
    Ok(SplitSeries {
        train: part(0..cut),
        test: part(cut..len),
        split_index: cut - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_series_stats() {
        let s = summarize(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(
            s,
            SummaryStats {
                mean: 2.0,
                std_dev: 0.0,
                max: 2.0,
                min: 2.0
            }
        );
    }

    #[test]
    fn two_point_stats() {
        let s = summarize(&[1.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.max, s.min), (2.0, 3.0, 1.0));
        assert_eq!(s.std_dev, 1.0);
    }

    #[test]
    fn empty_summary_is_an_error() {
        assert_eq!(summarize(&[]), Err(SeriesError::EmptySeries));
    }

    #[test]
    fn rejects_bad_series() {
        assert_eq!(TimeSeries::new(vec![]), Err(SeriesError::EmptySeries));
        assert_eq!(
            TimeSeries::new(vec![1.0]),
            Err(SeriesError::TooShort { len: 1 })
        );
        assert_eq!(
            TimeSeries::new(vec![1.0, f64::NAN]),
            Err(SeriesError::NonFiniteValue { index: 1 })
        );
        assert!(matches!(
            TimeSeries::with_labels(vec![1.0, 2.0], vec!["a".into()]),
            Err(SeriesError::LabelMismatch { .. })
        ));
    }

    #[test]
    fn split_sizes() {
        let s = TimeSeries::new((0..84).map(f64::from).collect()).unwrap();
        let sp = split_last_k(&s, 6).unwrap();
        assert_eq!((sp.train.len(), sp.test.len(), sp.split_index), (78, 6, 77));

        let s = TimeSeries::new((0..10).map(f64::from).collect()).unwrap();
        let sp = split_last_k(&s, 1).unwrap();
        assert_eq!((sp.train.len(), sp.test.len()), (9, 1));

        let s = TimeSeries::new((0..5).map(f64::from).collect()).unwrap();
        assert_eq!(
            split_last_k(&s, 5),
            Err(SeriesError::InvalidK { k: 5, len: 5 })
        );
        assert!(split_last_k(&s, 0).is_err());
    }

    proptest! {
        #[test]
        fn split_then_concat_is_identity(
            values in prop::collection::vec(-1e6f64..1e6, 2..120),
            k_frac in 0.0f64..1.0,
        ) {
            let n = values.len();
            let k = 1 + ((n - 1) as f64 * k_frac) as usize;
            let k = k.min(n - 1);
            let labels: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
            let s = TimeSeries::with_labels(values, labels).unwrap();
            let sp = split_last_k(&s, k).unwrap();
            prop_assert_eq!(sp.concat(), s);
        }

        #[test]
        fn summary_is_order_free(mut values in prop::collection::vec(-1e3f64..1e3, 1..60), seed in any::<u64>()) {
            let a = summarize(&values).unwrap();
            // deterministic shuffle: rotate + reverse
            let r = (seed as usize) % values.len();
            values.rotate_left(r);
            values.reverse();
            let b = summarize(&values).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!(a.min <= a.mean && a.mean <= a.max && a.std_dev >= 0.0);
        }
    }
}
