//! Point-forecast and interval quality measures.
//!
//! * SMAPE, in percent, bounded in `[0, 200]`. A term where actual and
//!   prediction are both zero contributes 0.
//! * Directional symmetry, in percent. A step scores only when the actual and
//!   predicted changes have a strictly positive product.
//! * PICP: the fraction of actuals inside `[lower, upper]`, bounds inclusive.
//! * PIAW: the mean of `upper - lower`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("need at least 2 points, got {0}")]
    TooShort(usize),
    #[error("lower bound exceeds upper bound at index {0}")]
    InvertedBounds(usize),
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<(), MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    Ok(())
}

pub fn smape(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricError> {
    check_pair(actual, predicted)?;
    let total: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(&y, &p)| {
            let den = (y.abs() + p.abs()) / 2.0;
            if den == 0.0 {
                0.0
            } else {
                (y - p).abs() / den
            }
        })
        .sum();
    Ok(100.0 * total / actual.len() as f64)
}

pub fn directional_symmetry(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricError> {
    check_pair(actual, predicted)?;
    let n = actual.len();
    if n < 2 {
        return Err(MetricError::TooShort(n));
    }
    let hits = actual
        .windows(2)
        .zip(predicted.windows(2))
        .filter(|(a, p)| (a[1] - a[0]) * (p[1] - p[0]) > 0.0)
        .count();
    Ok(100.0 * hits as f64 / (n - 1) as f64)
}

fn check_bounds(lower: &[f64], upper: &[f64]) -> Result<(), MetricError> {
    check_pair(lower, upper)?;
    match lower.iter().zip(upper).position(|(l, u)| l > u) {
        Some(i) => Err(MetricError::InvertedBounds(i)),
        None => Ok(()),
    }
}

/// Number of actuals covered by their interval.
pub fn covered_count(actual: &[f64], lower: &[f64], upper: &[f64]) -> Result<usize, MetricError> {
    check_pair(actual, lower)?;
    check_bounds(lower, upper)?;
    Ok(actual
        .iter()
        .zip(lower.iter().zip(upper))
        .filter(|&(y, (l, u))| l <= y && y <= u)
        .count())
}

pub fn picp(actual: &[f64], lower: &[f64], upper: &[f64]) -> Result<f64, MetricError> {
    Ok(covered_count(actual, lower, upper)? as f64 / actual.len() as f64)
}

pub fn piaw(lower: &[f64], upper: &[f64]) -> Result<f64, MetricError> {
    check_bounds(lower, upper)?;
    let total: f64 = lower.iter().zip(upper).map(|(l, u)| u - l).sum();
    Ok(total / lower.len() as f64)
}
