//! Two-stage and three-stage interval models and the multi-seed protocol.
//!
//! Both models share stage 1 (delay embedding of the whole series, with the
//! last `test_horizon` targets held out) and stage 2 (AR coefficients fitted
//! by NSGA-II over SMAPE and directional symmetry). The two-stage model then
//! grid-searches the interval multipliers `r1, r2` on the training rows; the
//! three-stage model runs NSGA-II a second time over (PICP, PIAW).
//!
//! Every stochastic step is seeded from the run seed, so a (series, config,
//! seed) triple always yields the same output.

mod intervals;
mod stage2;

pub use intervals::{
    fit_stage3, grid_search_r, pi_bounds, select_interval_params, GridResult, IntervalCandidate,
    IntervalParams, IntervalPolicy, Stage3Variant, R_MAX, R_MIN,
};
pub use stage2::{
    ar_predict, fit_stage2, select_point_model, ArModel, PointCandidate, PointPolicy, COEFF_LIMIT,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chaos::{self, reconstruct, AnalyzeOptions, ChaosError, ChaosReport};
use crate::metrics::{self, MetricError};
use crate::moea::{MoeaError, NsgaParams, Objectives};
use crate::series::{mean, population_std, SeriesError, TimeSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{rows} training rows; at least {required} are required")]
    TooFewRows { rows: usize, required: usize },
    #[error("front is empty")]
    EmptyFront,
    #[error("grid step {0} must split (0, 1) into equal steps with at least two interior points")]
    InvalidGrid(f64),
    #[error("coverage target {0} must lie in [0, 1]")]
    InvalidTarget(f64),
    #[error("at least one seed is required")]
    NoSeeds,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Chaos(#[from] ChaosError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Moea(#[from] MoeaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    TwoStage,
    ThreeStageSingle,
    ThreeStageDual,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::TwoStage,
        ModelKind::ThreeStageSingle,
        ModelKind::ThreeStageDual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::TwoStage => "two_stage",
            ModelKind::ThreeStageSingle => "three_stage_single",
            ModelKind::ThreeStageDual => "three_stage_dual",
        }
    }

    fn stage3(self) -> Option<Stage3Variant> {
        match self {
            ModelKind::TwoStage => None,
            ModelKind::ThreeStageSingle => Some(Stage3Variant::Single),
            ModelKind::ThreeStageDual => Some(Stage3Variant::Dual),
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| PipelineError::InvalidConfig(format!("unknown model {s:?}")))
    }
}

/// NSGA-II settings for each optimization stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StageParams {
    pub stage2: NsgaParams,
    pub stage3_single: NsgaParams,
    pub stage3_dual: NsgaParams,
}

/// Published per-dataset hyperparameter sets for the CPI inflation series.
/// Blocks map in order to stage 2, stage 3 (single), stage 3 (dual).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    FoodAndBeverages,
    FuelAndLight,
    Headline,
}

impl StageParams {
    pub fn preset(p: Preset) -> Self {
        let block = |pop_size, crossover_prob, generations| NsgaParams {
            pop_size,
            generations,
            crossover_prob,
            crossover_eta: 15.0,
            mutation_prob: 1.0,
            mutation_eta: 20.0,
            ..NsgaParams::default()
        };
        match p {
            Preset::FoodAndBeverages => Self {
                stage2: block(50, 0.8, 300),
                stage3_single: block(90, 0.75, 300),
                stage3_dual: block(70, 0.75, 200),
            },
            Preset::FuelAndLight => Self {
                stage2: block(50, 0.85, 100),
                stage3_single: block(90, 0.85, 350),
                stage3_dual: block(75, 0.8, 300),
            },
            Preset::Headline => Self {
                stage2: block(50, 0.95, 50),
                stage3_single: block(90, 0.95, 100),
                stage3_dual: block(70, 0.75, 400),
            },
        }
    }

    fn for_stage3(&self, v: Stage3Variant) -> &NsgaParams {
        match v {
            Stage3Variant::Single => &self.stage3_single,
            Stage3Variant::Dual => &self.stage3_dual,
        }
    }
}

impl Default for StageParams {
    fn default() -> Self {
        Self::preset(Preset::FoodAndBeverages)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Number of final observations held out for testing.
    pub test_horizon: usize,
    /// Chaos analysis options, including `tau` / `m` overrides.
    pub chaos: AnalyzeOptions,
    pub nsga: StageParams,
    pub grid_step: f64,
    pub picp_target: f64,
    pub point_policy: PointPolicy,
    pub interval_policy: IntervalPolicy,
    /// Fit on z-scored values (training mean and spread), reporting in the
    /// original units.
    pub standardize: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            test_horizon: 6,
            chaos: AnalyzeOptions::default(),
            nsga: StageParams::default(),
            grid_step: 0.01,
            picp_target: 0.95,
            point_policy: PointPolicy::default(),
            interval_policy: IntervalPolicy::default(),
            standardize: false,
        }
    }
}

/// Aligned per-step intervals with their coverage summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSeries {
    /// 0-based positions in the input series.
    pub index: Vec<usize>,
    pub labels: Vec<String>,
    pub actual: Vec<f64>,
    pub point: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub picp: f64,
    pub piaw: f64,
}

impl IntervalSeries {
    fn build(
        index: &[usize],
        series: &TimeSeries,
        point: Vec<f64>,
        params: &IntervalParams,
    ) -> Result<Self, PipelineError> {
        let actual: Vec<f64> = index.iter().map(|&t| series.values()[t]).collect();
        let (lower, upper) = pi_bounds(&point, params);
        Ok(Self {
            index: index.to_vec(),
            labels: index
                .iter()
                .map(|&t| series.label(t).unwrap_or_default().to_string())
                .collect(),
            picp: metrics::picp(&actual, &lower, &upper)?,
            piaw: metrics::piaw(&lower, &upper)?,
            actual,
            point,
            lower,
            upper,
        })
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn rows(&self) -> Vec<crate::io::IntervalRow> {
        (0..self.len())
            .map(|k| crate::io::IntervalRow {
                index: self.index[k],
                date: self.labels[k].clone(),
                actual: self.actual[k],
                point: self.point[k],
                lower: self.lower[k],
                upper: self.upper[k],
            })
            .collect()
    }
}

/// Everything one seeded run of a model produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub model: ModelKind,
    pub seed: u64,
    pub tau: usize,
    pub m: usize,
    pub lambda: Option<f64>,
    /// Coefficients in the units the model was fitted in.
    pub ar: ArModel,
    pub interval: IntervalParams,
    pub train_smape: f64,
    pub train_ds: f64,
    pub train: IntervalSeries,
    pub test: IntervalSeries,
    pub point_front: Vec<PointCandidate>,
    /// Empty for the two-stage model.
    pub interval_front: Vec<IntervalCandidate>,
}

impl RunOutcome {
    /// The front of the model's final optimization stage, minimization form:
    /// `(SMAPE, -DS)` for the two-stage model, `(-PICP, PIAW)` otherwise.
    pub fn final_front(&self) -> Vec<Objectives> {
        if self.interval_front.is_empty() {
            self.point_front.iter().map(|c| [c.smape, -c.ds]).collect()
        } else {
            self.interval_front
                .iter()
                .map(|c| [-c.picp, c.piaw])
                .collect()
        }
    }
}

/// Stage 1, computed once and shared by every run on the same series.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub series: TimeSeries,
    pub chaos: ChaosReport,
    config: PipelineConfig,
}

impl Prepared {
    pub fn new(series: &TimeSeries, config: &PipelineConfig) -> Result<Self, PipelineError> {
        if config.test_horizon == 0 || config.test_horizon >= series.len() {
            return Err(SeriesError::InvalidK {
                k: config.test_horizon,
                len: series.len(),
            }
            .into());
        }
        let chaos = chaos::analyze(series.values(), &config.chaos)?;
        if !chaos.chaotic {
            log::warn!(
                "no chaos detected (lambda = {:?}); embedding with tau={}, m={} regardless",
                chaos.lambda,
                chaos.tau,
                chaos.m
            );
        }
        Ok(Self {
            series: series.clone(),
            chaos,
            config: config.clone(),
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn run(&self, model: ModelKind, seed: u64) -> Result<RunOutcome, PipelineError> {
        let cfg = &self.config;
        let values = self.series.values();
        let n = values.len();
        let first_test = n - cfg.test_horizon;

        // optional z-scoring with training statistics
        let (shift, scale) = if cfg.standardize {
            let train = &values[..first_test];
            let s = population_std(train);
            (mean(train), if s > 0.0 { s } else { 1.0 })
        } else {
            (0.0, 1.0)
        };
        let fitted: Vec<f64> = values.iter().map(|v| (v - shift) / scale).collect();

        let data = reconstruct(&fitted, self.chaos.embedding())?;
        let (train, test) = data.split_at_origin(first_test);
        if test.rows() != cfg.test_horizon {
            return Err(PipelineError::TooFewRows {
                rows: train.rows(),
                required: self.chaos.embedding().span() + cfg.test_horizon + 1,
            });
        }

        let point_front = fit_stage2(&train, &cfg.nsga.stage2.with_seed(seed))?;
        let chosen = select_point_model(&point_front, cfg.point_policy)?.clone();
        let unscale =
            |p: Vec<f64>| -> Vec<f64> { p.into_iter().map(|v| v * scale + shift).collect() };
        let train_pred = unscale(ar_predict(&chosen.model, &train)?);
        let test_pred = unscale(ar_predict(&chosen.model, &test)?);
        let train_actual: Vec<f64> = train.origin_indices().iter().map(|&t| values[t]).collect();
        let sigma = population_std(&train_pred);

        let (interval, interval_front) = match model.stage3() {
            None => {
                let g = grid_search_r(
                    &train_actual,
                    &train_pred,
                    sigma,
                    cfg.grid_step,
                    cfg.picp_target,
                )?;
                (g.params, Vec::new())
            }
            Some(variant) => {
                let params = cfg.nsga.for_stage3(variant).with_seed(stage3_seed(seed));
                let front = fit_stage3(&train_actual, &train_pred, sigma, variant, &params)?;
                let pick = *select_interval_params(&front, cfg.interval_policy)?;
                (pick.params, front)
            }
        };

        Ok(RunOutcome {
            model,
            seed,
            tau: self.chaos.tau,
            m: self.chaos.m,
            lambda: self.chaos.lambda,
            ar: chosen.model,
            interval,
            train_smape: chosen.smape,
            train_ds: chosen.ds,
            train: IntervalSeries::build(
                train.origin_indices(),
                &self.series,
                train_pred,
                &interval,
            )?,
            test: IntervalSeries::build(test.origin_indices(), &self.series, test_pred, &interval)?,
            point_front,
            interval_front,
        })
    }

    /// Runs every seed concurrently; results come back in seed order.
    pub fn run_seeds(
        &self,
        model: ModelKind,
        seeds: &[u64],
        parallel: bool,
    ) -> Vec<Result<RunOutcome, PipelineError>> {
        if parallel {
            seeds.par_iter().map(|&s| self.run(model, s)).collect()
        } else {
            seeds.iter().map(|&s| self.run(model, s)).collect()
        }
    }
}

/// Stage 3 draws from a stream distinct from stage 2 of the same seed.
fn stage3_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

pub fn run_two_stage(
    series: &TimeSeries,
    config: &PipelineConfig,
    seed: u64,
) -> Result<RunOutcome, PipelineError> {
    Prepared::new(series, config)?.run(ModelKind::TwoStage, seed)
}

pub fn run_three_stage(
    series: &TimeSeries,
    config: &PipelineConfig,
    variant: Stage3Variant,
    seed: u64,
) -> Result<RunOutcome, PipelineError> {
    let model = match variant {
        Stage3Variant::Single => ModelKind::ThreeStageSingle,
        Stage3Variant::Dual => ModelKind::ThreeStageDual,
    };
    Prepared::new(series, config)?.run(model, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub picp: f64,
    pub piaw: f64,
    pub train_picp: f64,
    pub train_piaw: f64,
    pub coeffs: Vec<f64>,
    pub r1: f64,
    pub r2: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFront {
    pub seed: u64,
    pub points: Vec<Objectives>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub model: ModelKind,
    pub tau: usize,
    pub m: usize,
    pub lambda: Option<f64>,
    pub picp_mean: f64,
    pub picp_std: f64,
    pub piaw_mean: f64,
    pub piaw_std: f64,
    pub per_seed: Vec<SeedSummary>,
    pub fronts: Vec<SeedFront>,
}

impl ExperimentReport {
    /// Aggregates test PICP/PIAW over runs with the population standard deviation.
    pub fn from_runs(runs: &[RunOutcome]) -> Result<Self, PipelineError> {
        let first = runs.first().ok_or(PipelineError::NoSeeds)?;
        let picps: Vec<f64> = runs.iter().map(|r| r.test.picp).collect();
        let piaws: Vec<f64> = runs.iter().map(|r| r.test.piaw).collect();
        Ok(Self {
            model: first.model,
            tau: first.tau,
            m: first.m,
            lambda: first.lambda,
            picp_mean: mean(&picps),
            picp_std: population_std(&picps),
            piaw_mean: mean(&piaws),
            piaw_std: population_std(&piaws),
            per_seed: runs
                .iter()
                .map(|r| SeedSummary {
                    seed: r.seed,
                    picp: r.test.picp,
                    piaw: r.test.piaw,
                    train_picp: r.train.picp,
                    train_piaw: r.train.piaw,
                    coeffs: r.ar.coeffs.clone(),
                    r1: r.interval.r1,
                    r2: r.interval.r2,
                    sigma: r.interval.sigma_train,
                })
                .collect(),
            fronts: runs
                .iter()
                .map(|r| SeedFront {
                    seed: r.seed,
                    points: r.final_front(),
                })
                .collect(),
        })
    }
}

/// Runs `model` once per seed, sharing one chaos analysis; fails on the
/// first failing seed.
pub fn run_experiment(
    series: &TimeSeries,
    config: &PipelineConfig,
    model: ModelKind,
    seeds: &[u64],
) -> Result<ExperimentReport, PipelineError> {
    if seeds.is_empty() {
        return Err(PipelineError::NoSeeds);
    }
    let prepared = Prepared::new(series, config)?;
    let runs = prepared
        .run_seeds(model, seeds, true)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    ExperimentReport::from_runs(&runs)
}
