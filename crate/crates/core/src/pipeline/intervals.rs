//! Interval construction around point predictions: `lower = p - r1 sigma`,
//! `upper = p + r2 sigma`, with `sigma` the spread of the training predictions.

use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::metrics::{covered_count, piaw, picp};
use crate::moea::{self, Bounds, EvaluationError, NsgaParams, Objectives, Problem};

/// `r` lives in the open interval `(0, 1)`; the optimizer clips to this box.
pub const R_MIN: f64 = 1e-6;
pub const R_MAX: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalParams {
    pub r1: f64,
    pub r2: f64,
    pub sigma_train: f64,
}

impl IntervalParams {
    pub fn width(&self) -> f64 {
        (self.r1 + self.r2) * self.sigma_train
    }
}

pub fn pi_bounds(predictions: &[f64], params: &IntervalParams) -> (Vec<f64>, Vec<f64>) {
    let lo = params.r1 * params.sigma_train;
    let hi = params.r2 * params.sigma_train;
    predictions.iter().map(|p| (p - lo, p + hi)).unzip()
}

fn check_lengths(actual: &[f64], predictions: &[f64]) -> Result<(), PipelineError> {
    if actual.len() != predictions.len() {
        return Err(PipelineError::DimensionMismatch {
            expected: actual.len(),
            got: predictions.len(),
        });
    }
    if actual.is_empty() {
        return Err(PipelineError::TooFewRows {
            rows: 0,
            required: 1,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub params: IntervalParams,
    pub train_picp: f64,
    pub train_piaw: f64,
    /// Training predictions had zero spread, so every pair gave the same
    /// zero-width interval.
    pub degenerate: bool,
}

/// Exhaustive search over `r1, r2` in `{s, 2s, ..., 1 - s}`.
///
/// Among pairs whose training coverage reaches `picp_target`, the narrowest
/// wins; when none does, the best-covering pair, narrowest among those. Ties
/// go to the lexicographically smallest `(r1, r2)`.
pub fn grid_search_r(
    actual: &[f64],
    predictions: &[f64],
    sigma_train: f64,
    grid_step: f64,
    picp_target: f64,
) -> Result<GridResult, PipelineError> {
    check_lengths(actual, predictions)?;
    let steps = (1.0 / grid_step).round();
    if grid_step.is_nan()
        || grid_step <= 0.0
        || steps < 3.0
        || ((steps * grid_step) - 1.0).abs() > 1e-9
    {
        return Err(PipelineError::InvalidGrid(grid_step));
    }
    if !(0.0..=1.0).contains(&picp_target) {
        return Err(PipelineError::InvalidTarget(picp_target));
    }
    let steps = steps as usize;
    let r_at = |i: usize| i as f64 / steps as f64;
    let n = actual.len();
    let degenerate = sigma_train == 0.0;
    if degenerate {
        log::warn!("training predictions have zero spread; interval width is zero for every r");
    }

    // maximized: reaching the target, then coverage below it, then
    // narrowness, then lexicographic order of (r1, r2)
    let key = |covered: usize, i: usize, j: usize| {
        let meets = covered as f64 / n as f64 >= picp_target;
        let cov = if meets { 0 } else { covered };
        (meets, cov, Reverse(i + j), Reverse(i), Reverse(j))
    };
    let mut best = None;
    for i in 1..steps {
        for j in 1..steps {
            let params = IntervalParams {
                r1: r_at(i),
                r2: r_at(j),
                sigma_train,
            };
            let (lo, hi) = pi_bounds(predictions, &params);
            let k = key(covered_count(actual, &lo, &hi)?, i, j);
            if best.as_ref().is_none_or(|b| k > *b) {
                best = Some(k);
            }
        }
    }
    let (.., Reverse(i), Reverse(j)) = best.expect("grid has at least one pair");
    let params = IntervalParams {
        r1: r_at(i),
        r2: r_at(j),
        sigma_train,
    };
    let (lo, hi) = pi_bounds(predictions, &params);
    Ok(GridResult {
        params,
        train_picp: picp(actual, &lo, &hi)?,
        train_piaw: piaw(&lo, &hi)?,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage3Variant {
    /// One decision variable, `r1 = r2 = r`.
    Single,
    /// `r1` and `r2` independent.
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalCandidate {
    pub params: IntervalParams,
    pub picp: f64,
    pub piaw: f64,
}

struct Stage3Problem<'a> {
    actual: &'a [f64],
    predictions: &'a [f64],
    sigma: f64,
    variant: Stage3Variant,
    bounds: Bounds,
}

impl Stage3Problem<'_> {
    fn params(&self, x: &[f64]) -> IntervalParams {
        let (r1, r2) = match self.variant {
            Stage3Variant::Single => (x[0], x[0]),
            Stage3Variant::Dual => (x[0], x[1]),
        };
        IntervalParams {
            r1,
            r2,
            sigma_train: self.sigma,
        }
    }
}

impl Problem for Stage3Problem<'_> {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> Result<Objectives, EvaluationError> {
        let (lo, hi) = pi_bounds(self.predictions, &self.params(x));
        let err = |e: crate::metrics::MetricError| EvaluationError(e.to_string());
        Ok([
            -picp(self.actual, &lo, &hi).map_err(err)?,
            piaw(&lo, &hi).map_err(err)?,
        ])
    }
}

/// Optimizes `(PICP, PIAW)` on the training data over `r` (single) or
/// `(r1, r2)` (dual).
pub fn fit_stage3(
    actual: &[f64],
    predictions: &[f64],
    sigma_train: f64,
    variant: Stage3Variant,
    params: &NsgaParams,
) -> Result<Vec<IntervalCandidate>, PipelineError> {
    check_lengths(actual, predictions)?;
    let dims = match variant {
        Stage3Variant::Single => 1,
        Stage3Variant::Dual => 2,
    };
    let problem = Stage3Problem {
        actual,
        predictions,
        sigma: sigma_train,
        variant,
        bounds: Bounds::uniform(dims, R_MIN, R_MAX)?,
    };
    let result = moea::run(&problem, params)?;
    Ok(result
        .front
        .iter()
        .map(|ind| IntervalCandidate {
            params: problem.params(&ind.x),
            picp: -ind.f[0],
            piaw: ind.f[1],
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum IntervalPolicy {
    /// Largest PICP, then smallest PIAW, then earliest.
    #[default]
    MaxPicp,
    /// Smallest PIAW among members with `PICP >= threshold`, then largest
    /// PICP; falls back to `MaxPicp` when no member qualifies.
    MinPiawAbove { threshold: f64 },
}

pub fn select_interval_params(
    front: &[IntervalCandidate],
    policy: IntervalPolicy,
) -> Result<&IntervalCandidate, PipelineError> {
    if front.is_empty() {
        return Err(PipelineError::EmptyFront);
    }
    let max_picp = || {
        front
            .iter()
            .reduce(|b, c| {
                let better = c.picp.total_cmp(&b.picp).then(b.piaw.total_cmp(&c.piaw));
                if better.is_gt() {
                    c
                } else {
                    b
                }
            })
            .expect("non-empty")
    };
    Ok(match policy {
        IntervalPolicy::MaxPicp => max_picp(),
        IntervalPolicy::MinPiawAbove { threshold } => front
            .iter()
            .filter(|c| c.picp >= threshold)
            .reduce(|b, c| {
                let better = b.piaw.total_cmp(&c.piaw).then(c.picp.total_cmp(&b.picp));
                if better.is_gt() {
                    c
                } else {
                    b
                }
            })
            .unwrap_or_else(|| {
                log::warn!("no front member reaches PICP {threshold}; using the best-covering one");
                max_picp()
            }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moea::weakly_dominates;

    #[test]
    fn bound_arithmetic() {
        let p = IntervalParams {
            r1: 0.5,
            r2: 1.0,
            sigma_train: 2.0,
        };
        assert_eq!(pi_bounds(&[5.0], &p), (vec![4.0], vec![7.0]));
        let sym = IntervalParams {
            r1: 0.3,
            r2: 0.3,
            sigma_train: 1.5,
        };
        let (lo, hi) = pi_bounds(&[1.0, -2.0], &sym);
        for k in 0..2 {
            assert!(((hi[k] - lo[k]) - 0.9).abs() < 1e-12);
        }
        let flat = IntervalParams {
            sigma_train: 0.0,
            ..p
        };
        let (lo, hi) = pi_bounds(&[3.0], &flat);
        assert_eq!((lo[0], hi[0]), (3.0, 3.0));
    }

    #[test]
    fn shifting_predictions_shifts_bounds() {
        let p = IntervalParams {
            r1: 0.25,
            r2: 0.75,
            sigma_train: 2.0,
        };
        let pred = [1.0, 2.0, 4.0];
        let shifted: Vec<f64> = pred.iter().map(|v| v + 8.0).collect();
        let (l0, h0) = pi_bounds(&pred, &p);
        let (l1, h1) = pi_bounds(&shifted, &p);
        for k in 0..3 {
            assert_eq!(l1[k], l0[k] + 8.0);
            assert_eq!(h1[k], h0[k] + 8.0);
        }
    }

    #[test]
    fn perfect_predictor_takes_the_smallest_pair() {
        let y = [1.0, 3.0, 2.0, 5.0];
        let g = grid_search_r(&y, &y, 1.4, 0.01, 0.95).unwrap();
        assert_eq!((g.params.r1, g.params.r2), (0.01, 0.01));
        assert_eq!(g.train_picp, 1.0);
        let g = grid_search_r(&[1.0, 9.0], &[0.0, 0.0], 1.0, 0.01, 0.0).unwrap();
        assert_eq!((g.params.r1, g.params.r2), (0.01, 0.01));
    }

    #[test]
    fn zero_spread_is_flagged() {
        let g = grid_search_r(&[1.0, 2.0], &[1.0, 1.0], 0.0, 0.1, 0.95).unwrap();
        assert!(g.degenerate);
        assert_eq!((g.params.r1, g.params.r2), (0.1, 0.1));
        assert_eq!(g.train_piaw, 0.0);
        assert_eq!(g.train_picp, 0.5);
    }

    /// Enumerates the grid independently and applies the rule directly.
    fn grid_oracle(
        actual: &[f64],
        pred: &[f64],
        sigma: f64,
        k: usize,
        target: f64,
    ) -> (usize, usize) {
        let mut all = Vec::new();
        for i in 1..k {
            for j in 1..k {
                let (r1, r2) = (i as f64 / k as f64, j as f64 / k as f64);
                let cov = actual
                    .iter()
                    .zip(pred)
                    .filter(|&(&y, &p)| p - r1 * sigma <= y && y <= p + r2 * sigma)
                    .count();
                all.push((cov, i, j));
            }
        }
        let n = actual.len() as f64;
        let ok: Vec<_> = all.iter().filter(|c| c.0 as f64 / n >= target).collect();
        let pool: Vec<_> = if ok.is_empty() {
            let top = all.iter().map(|c| c.0).max().unwrap();
            all.iter().filter(|c| c.0 == top).collect()
        } else {
            ok
        };
        let w = pool.iter().map(|c| c.1 + c.2).min().unwrap();
        let &&(_, i, j) = pool
            .iter()
            .filter(|c| c.1 + c.2 == w)
            .min_by_key(|c| (c.1, c.2))
            .unwrap();
        (i, j)
    }

    #[test]
    fn matches_exhaustive_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for trial in 0..200 {
            let n = rng.random_range(2..15);
            let pred: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let mut actual: Vec<f64> = pred
                .iter()
                .map(|p| p + rng.random_range(-1.5..1.5))
                .collect();
            if trial % 3 == 0 {
                actual[0] += 50.0; // unreachable
            }
            let sigma = rng.random_range(0.5..2.0);
            let target = [0.0, 0.5, 0.9, 0.95, 1.0][trial % 5];
            let g = grid_search_r(&actual, &pred, sigma, 0.05, target).unwrap();
            let (i, j) = grid_oracle(&actual, &pred, sigma, 20, target);
            assert_eq!(
                (g.params.r1, g.params.r2),
                (i as f64 / 20.0, j as f64 / 20.0),
                "trial {trial}"
            );
        }
    }

    #[test]
    fn invalid_grid() {
        assert!(matches!(
            grid_search_r(&[1.0], &[1.0], 1.0, 0.7, 0.9),
            Err(PipelineError::InvalidGrid(_))
        ));
        assert!(matches!(
            grid_search_r(&[1.0], &[1.0], 1.0, 0.03, 0.9),
            Err(PipelineError::InvalidGrid(_))
        ));
    }

    fn small_instance() -> (Vec<f64>, Vec<f64>, f64) {
        let pred = vec![1.0, 1.4, 0.8, 2.1, 1.7, 1.2, 0.5, 1.9, 1.1, 1.5];
        let off = [0.1, -0.3, 0.45, -0.05, 0.2, -0.6, 0.35, 0.05, -0.15, 0.28];
        let actual = pred.iter().zip(off).map(|(p, o)| p + o).collect();
        let sigma = crate::series::population_std(&pred);
        (actual, pred, sigma)
    }

    #[test]
    fn zero_spread_front_is_the_coverage_point() {
        let (actual, pred, _) = small_instance();
        let params = NsgaParams {
            generations: 20,
            ..NsgaParams::default()
        };
        let front = fit_stage3(&actual, &pred, 0.0, Stage3Variant::Dual, &params).unwrap();
        for c in &front {
            assert_eq!(c.piaw, 0.0);
            assert_eq!(c.picp, 0.0);
        }
    }

    #[test]
    fn single_variant_is_covered_by_dual() {
        let (actual, pred, sigma) = small_instance();
        let params = NsgaParams {
            generations: 150,
            seed: 4,
            ..NsgaParams::default()
        };
        let single = fit_stage3(&actual, &pred, sigma, Stage3Variant::Single, &params).unwrap();
        let dual = fit_stage3(&actual, &pred, sigma, Stage3Variant::Dual, &params).unwrap();
        for s in &single {
            assert_eq!(s.params.r1, s.params.r2);
            let covered = dual
                .iter()
                .any(|d| weakly_dominates(&[-d.picp, d.piaw - 1e-3], &[-s.picp, s.piaw]));
            assert!(covered, "single point {s:?} not attained by dual front");
        }
        for c in single.iter().chain(&dual) {
            assert!(c.params.r1 > 0.0 && c.params.r1 < 1.0);
            assert!((c.piaw - c.params.width()).abs() < 1e-12);
        }
    }

    #[test]
    fn selection_policies() {
        let c = |picp, piaw| IntervalCandidate {
            params: IntervalParams {
                r1: 0.5,
                r2: 0.5,
                sigma_train: 1.0,
            },
            picp,
            piaw,
        };
        let front = [c(1.0, 3.0), c(0.9, 2.0)];
        assert_eq!(
            select_interval_params(&front, IntervalPolicy::MaxPicp)
                .unwrap()
                .piaw,
            3.0
        );
        let t = IntervalPolicy::MinPiawAbove { threshold: 0.85 };
        assert_eq!(select_interval_params(&front, t).unwrap().piaw, 2.0);
        let t = IntervalPolicy::MinPiawAbove { threshold: 1.5 };
        assert_eq!(select_interval_params(&front, t).unwrap().piaw, 3.0);
        assert_eq!(
            select_interval_params(&front[1..], IntervalPolicy::MaxPicp)
                .unwrap()
                .piaw,
            2.0
        );
        assert!(select_interval_params(&[], IntervalPolicy::MaxPicp).is_err());
    }
}
