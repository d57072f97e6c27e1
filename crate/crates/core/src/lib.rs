//! Prediction intervals for univariate time series from chaos-aware
//! autoregression and bi-objective evolutionary search.
//!
//! The pipeline reconstructs the phase space of a series ([`chaos`]), fits
//! autoregressive coefficients with NSGA-II over SMAPE and directional
//! symmetry ([`moea`], [`metrics`]), then widens the point forecasts into
//! intervals either by grid search or by a second NSGA-II run over coverage
//! and width ([`pipeline`]). [`eaf`] summarizes fronts from repeated seeds.

pub mod chaos;
pub mod eaf;
pub mod io;
pub mod metrics;
pub mod moea;
pub mod pipeline;
pub mod series;

pub use chaos::{ChaosReport, EmbeddedDataset, EmbeddingParams};
pub use eaf::{AttainmentSurface, FrontEnsemble};
pub use moea::{Individual, NsgaParams, Objectives};
pub use pipeline::{
    ArModel, ExperimentReport, IntervalParams, IntervalSeries, ModelKind, PipelineConfig,
    RunOutcome,
};
pub use series::{SplitSeries, SummaryStats, TimeSeries};
