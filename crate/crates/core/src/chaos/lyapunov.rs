//! Largest Lyapunov exponent by Rosenstein's nearest-neighbor divergence method.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::embed::{delay_vectors, EmbeddingParams};
use super::ChaosError;

/// Minimum number of state vectors the estimator accepts.
pub const MIN_STATE_VECTORS: usize = 20;

/// Which part of the divergence curve the slope is fitted over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FitRange {
    /// `k` from 0 up to the first step reaching 70% of the curve's rise
    /// (the start of the saturation plateau), capped at `min(20, k_max)`.
    /// A curve rising less than one nat is treated as flat and fitted over
    /// the whole capped range.
    #[default]
    Auto,
    /// Inclusive `k` range.
    Fixed { start: usize, end: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RosensteinOptions {
    /// Temporal neighbors with `|i - j| <= w` are never paired. Defaults to `tau * m`.
    pub theiler_window: Option<usize>,
    /// Longest divergence horizon tracked. Defaults to `min(50, vectors / 10)`.
    pub k_max: Option<usize>,
    pub fit_range: FitRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    /// Nats per time step.
    pub lambda: f64,
    /// Mean log-distance `y(k)` for `k = 0..divergence.len()`.
    pub divergence: Vec<f64>,
    pub fit_start: usize,
    pub fit_end: usize,
    /// Nearest-neighbor pairs found at `k = 0`.
    pub pairs: usize,
}

const AUTO_FIT_CAP: usize = 20;
const AUTO_MIN_RISE: f64 = 1.0;
const AUTO_SATURATION_FRACTION: f64 = 0.7;

pub fn lyapunov_rosenstein(
    values: &[f64],
    params: EmbeddingParams,
    opts: &RosensteinOptions,
) -> Result<LyapunovEstimate, ChaosError> {
    let EmbeddingParams { tau, m } = params;
    let n = values.len();
    let span = (m - 1) * tau;
    if n < span + MIN_STATE_VECTORS {
        return Err(ChaosError::SeriesTooShort {
            len: n,
            required: span + MIN_STATE_VECTORS,
        });
    }
    let count = n - span;
    let states = delay_vectors(values, tau, m, count);
    let state = |i: usize| &states[i * m..(i + 1) * m];
    let dist = |i: usize, j: usize| -> f64 {
        state(i)
            .iter()
            .zip(state(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };

    let w = opts.theiler_window.unwrap_or(tau * m);
    let k_max = opts.k_max.unwrap_or((count / 10).min(50)).max(1);

    // Nearest neighbor outside the Theiler window; zero distances are skipped.
    let neighbors: Vec<Option<usize>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut best: Option<(f64, usize)> = None;
            for j in 0..count {
                if i.abs_diff(j) <= w {
                    continue;
                }
                let d = dist(i, j);
                if d > 0.0 && best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, j));
                }
            }
            best.map(|(_, j)| j)
        })
        .collect();

    let pairs = neighbors.iter().flatten().count();
    if pairs == 0 {
        return Err(ChaosError::NoValidPairs);
    }

    let mut divergence = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut sum = 0.0;
        let mut used = 0usize;
        for (i, nb) in neighbors.iter().enumerate() {
            let Some(j) = *nb else { continue };
            if i + k >= count || j + k >= count {
                continue;
            }
            let d = dist(i + k, j + k);
            if d > 0.0 {
                sum += d.ln();
                used += 1;
            }
        }
        if used == 0 {
            break;
        }
        divergence.push(sum / used as f64);
    }

    let (fit_start, fit_end) = match opts.fit_range {
        FitRange::Fixed { start, end } => (start, end.min(divergence.len().saturating_sub(1))),
        FitRange::Auto => (0, auto_fit_end(&divergence, k_max)),
    };
    if fit_end < fit_start + 1 {
        return Err(ChaosError::NoValidPairs);
    }
    let lambda = slope(&divergence[fit_start..=fit_end], fit_start);

    Ok(LyapunovEstimate {
        lambda,
        divergence,
        fit_start,
        fit_end,
        pairs,
    })
}

fn auto_fit_end(curve: &[f64], k_max: usize) -> usize {
    let last = curve.len().saturating_sub(1);
    let cap = AUTO_FIT_CAP.min(k_max).min(last);
    let lo = curve[0];
    let hi = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < AUTO_MIN_RISE {
        return cap;
    }
    let level = lo + AUTO_SATURATION_FRACTION * (hi - lo);
    (1..=cap)
        .find(|&k| curve[k] >= level)
        .map_or(cap, |k| k.max(2).min(cap))
}

/// Least-squares slope of `ys` against `k = offset, offset + 1, ...`.
fn slope(ys: &[f64], offset: usize) -> f64 {
    let n = ys.len() as f64;
    let xs = (0..ys.len()).map(|i| (i + offset) as f64);
    let mx = xs.clone().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (sxy, sxx) = xs.zip(ys).fold((0.0, 0.0), |(sxy, sxx), (x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    sxy / sxx
}
