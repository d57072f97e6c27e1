//! Phase-space reconstruction and chaos diagnostics.
//!
//! [`analyze`] chains delay selection from the autocorrelation function,
//! Cao's embedding dimension and Rosenstein's largest Lyapunov exponent.

mod acf;
mod cao;
mod embed;
mod lyapunov;

pub use acf::{autocorrelation, select_delay};
pub use cao::{cao_min_dimension, CaoOptions, CaoResult, Saturation};
pub use embed::{reconstruct, EmbeddedDataset, EmbeddingParams};
pub use lyapunov::{
    lyapunov_rosenstein, FitRange, LyapunovEstimate, RosensteinOptions, MIN_STATE_VECTORS,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChaosError {
    #[error("series of length {len} is too short (need at least {required})")]
    SeriesTooShort { len: usize, required: usize },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("invalid embedding parameters tau={tau}, m={m} (both must be >= 1)")]
    InvalidParams { tau: usize, m: usize },
    #[error("Cao threshold {0} must lie in (0, 1)")]
    InvalidThreshold(f64),
    #[error("no valid nearest-neighbor pairs to track")]
    NoValidPairs,
    #[error("every nearest neighbor at dimension {dim} has zero distance")]
    DegenerateNeighbors { dim: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct AnalyzeOptions {
    /// Forces the delay instead of deriving it from the ACF.
    pub tau: Option<usize>,
    /// Forces the embedding dimension instead of running Cao's method.
    pub m: Option<usize>,
    /// Largest ACF lag inspected; defaults to a quarter of the series length.
    pub max_lag: Option<usize>,
    pub cao: CaoOptions,
    pub rosenstein: RosensteinOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamSource {
    Override,
    Estimated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosReport {
    /// Largest Lyapunov exponent in nats per step; `None` when no neighbor
    /// pairs could be tracked.
    pub lambda: Option<f64>,
    pub tau: usize,
    pub m: usize,
    /// `lambda >= 0`.
    pub chaotic: bool,
    pub tau_source: ParamSource,
    pub m_source: ParamSource,
    pub acf: Vec<f64>,
    pub e1_curve: Vec<f64>,
    pub e2_curve: Vec<f64>,
    pub cao_saturation: Option<Saturation>,
    pub divergence_curve: Vec<f64>,
    pub fit_range: Option<(usize, usize)>,
}

impl ChaosReport {
    pub fn embedding(&self) -> EmbeddingParams {
        EmbeddingParams {
            tau: self.tau,
            m: self.m,
        }
    }
}

pub fn analyze(values: &[f64], opts: &AnalyzeOptions) -> Result<ChaosReport, ChaosError> {
    let n = values.len();
    if n < 3 {
        return Err(ChaosError::SeriesTooShort {
            len: n,
            required: 3,
        });
    }
    let max_lag = opts.max_lag.unwrap_or(n / 4).clamp(1, n - 2);
    let acf = autocorrelation(values, max_lag)?;

    let (tau, tau_source) = match opts.tau {
        Some(t) => (t, ParamSource::Override),
        None => (select_delay(&acf), ParamSource::Estimated),
    };
    if tau == 0 {
        return Err(ChaosError::InvalidParams {
            tau,
            m: opts.m.unwrap_or(1),
        });
    }

    let (m, m_source, e1_curve, e2_curve, cao_saturation) = match opts.m {
        Some(m) => (m, ParamSource::Override, Vec::new(), Vec::new(), None),
        None => {
            // shrink the search so the series can support it
            let feasible = (n.saturating_sub(2) / tau).saturating_sub(1);
            let max_dim = opts.cao.max_dim.min(feasible);
            if max_dim == 0 {
                return Err(ChaosError::SeriesTooShort {
                    len: n,
                    required: 2 * tau + 2,
                });
            }
            let cao = cao_min_dimension(values, tau, max_dim, opts.cao.threshold)?;
            (
                cao.m,
                ParamSource::Estimated,
                cao.e1,
                cao.e2,
                Some(cao.saturation),
            )
        }
    };
    let params = EmbeddingParams::new(tau, m)?;

    let (lambda, divergence_curve, fit_range) =
        match lyapunov_rosenstein(values, params, &opts.rosenstein) {
            Ok(est) => (
                Some(est.lambda),
                est.divergence,
                Some((est.fit_start, est.fit_end)),
            ),
            Err(ChaosError::NoValidPairs) => {
                log::warn!("no trackable neighbor pairs; treating series as non-chaotic");
                (None, Vec::new(), None)
            }
            Err(e) => return Err(e),
        };

    Ok(ChaosReport {
        lambda,
        tau,
        m,
        chaotic: lambda.is_some_and(|l| l >= 0.0),
        tau_source,
        m_source,
        acf,
        e1_curve,
        e2_curve,
        cao_saturation,
        divergence_curve,
        fit_range,
    })
}
