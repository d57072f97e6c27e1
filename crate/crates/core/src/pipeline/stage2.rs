//! Autoregressive point model fitted by NSGA-II over (SMAPE, DS).

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::chaos::EmbeddedDataset;
use crate::metrics::{directional_symmetry, smape};
use crate::moea::{self, Bounds, EvaluationError, NsgaParams, Objectives, Problem};

/// Coefficients live in the open box `(-0.5, 0.5)`; the optimizer uses this
/// closed inner box.
pub const COEFF_LIMIT: f64 = 0.5 - 1e-6;

/// `y_t = a0 + a1 y_{t-tau} + ... + am y_{t-m tau}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArModel {
    pub coeffs: Vec<f64>,
    pub tau: usize,
    pub m: usize,
}

impl ArModel {
    pub fn new(coeffs: Vec<f64>, tau: usize, m: usize) -> Result<Self, PipelineError> {
        if coeffs.len() != m + 1 {
            return Err(PipelineError::DimensionMismatch {
                expected: m + 1,
                got: coeffs.len(),
            });
        }
        Ok(Self { coeffs, tau, m })
    }

    fn predict_row(&self, inputs: &[f64]) -> f64 {
        self.coeffs[1..]
            .iter()
            .zip(inputs)
            .fold(self.coeffs[0], |acc, (a, y)| acc + a * y)
    }
}

pub fn ar_predict(model: &ArModel, data: &EmbeddedDataset) -> Result<Vec<f64>, PipelineError> {
    let p = data.params();
    if p.m != model.m || p.tau != model.tau || model.coeffs.len() != p.m + 1 {
        return Err(PipelineError::DimensionMismatch {
            expected: p.m + 1,
            got: model.coeffs.len(),
        });
    }
    Ok(data
        .input_rows()
        .map(|row| model.predict_row(row))
        .collect())
}

/// A stage-2 Pareto member with its training scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCandidate {
    pub model: ArModel,
    pub smape: f64,
    /// Directional symmetry in percent, larger is better.
    pub ds: f64,
}

struct Stage2Problem<'a> {
    data: &'a EmbeddedDataset,
    bounds: Bounds,
}

impl Problem for Stage2Problem<'_> {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> Result<Objectives, EvaluationError> {
        let p = self.data.params();
        let model = ArModel {
            coeffs: x.to_vec(),
            tau: p.tau,
            m: p.m,
        };
        let pred: Vec<f64> = self
            .data
            .input_rows()
            .map(|r| model.predict_row(r))
            .collect();
        let actual = self.data.targets();
        let err = |e: crate::metrics::MetricError| EvaluationError(e.to_string());
        Ok([
            smape(actual, &pred).map_err(err)?,
            -directional_symmetry(actual, &pred).map_err(err)?,
        ])
    }
}

/// Fits AR coefficients on `train`, returning the final first front.
pub fn fit_stage2(
    train: &EmbeddedDataset,
    params: &NsgaParams,
) -> Result<Vec<PointCandidate>, PipelineError> {
    let p = train.params();
    if train.rows() < p.m + 2 {
        return Err(PipelineError::TooFewRows {
            rows: train.rows(),
            required: p.m + 2,
        });
    }
    let problem = Stage2Problem {
        data: train,
        bounds: Bounds::uniform(p.m + 1, -COEFF_LIMIT, COEFF_LIMIT)?,
    };
    let result = moea::run(&problem, params)?;
    Ok(result
        .front
        .into_iter()
        .map(|ind| PointCandidate {
            model: ArModel {
                coeffs: ind.x,
                tau: p.tau,
                m: p.m,
            },
            smape: ind.f[0],
            ds: -ind.f[1],
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointPolicy {
    /// Smallest SMAPE, then largest DS, then earliest.
    #[default]
    MinSmape,
    /// Largest DS, then smallest SMAPE, then earliest.
    MaxDs,
    /// Largest perpendicular distance to the chord between the two extreme
    /// members, in range-normalized objective space.
    Knee,
}

pub fn select_point_model(
    front: &[PointCandidate],
    policy: PointPolicy,
) -> Result<&PointCandidate, PipelineError> {
    if front.is_empty() {
        return Err(PipelineError::EmptyFront);
    }
    let by_smape = |a: &PointCandidate, b: &PointCandidate| {
        a.smape.total_cmp(&b.smape).then(b.ds.total_cmp(&a.ds))
    };
    let by_ds = |a: &PointCandidate, b: &PointCandidate| {
        b.ds.total_cmp(&a.ds).then(a.smape.total_cmp(&b.smape))
    };
    // first minimum under `cmp`, keeping the earliest on ties
    let first_min = |cmp: &dyn Fn(&PointCandidate, &PointCandidate) -> std::cmp::Ordering| {
        front
            .iter()
            .reduce(|best, c| if cmp(c, best).is_lt() { c } else { best })
            .expect("non-empty")
    };
    Ok(match policy {
        PointPolicy::MinSmape => first_min(&by_smape),
        PointPolicy::MaxDs => first_min(&by_ds),
        PointPolicy::Knee => knee(front).unwrap_or_else(|| first_min(&by_smape)),
    })
}

fn knee(front: &[PointCandidate]) -> Option<&PointCandidate> {
    let f: Vec<[f64; 2]> = front.iter().map(|c| [c.smape, -c.ds]).collect();
    let lo = |k: usize| f.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min);
    let hi = |k: usize| f.iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max);
    let (r0, r1) = (hi(0) - lo(0), hi(1) - lo(1));
    if front.len() < 3 || r0 <= 0.0 || r1 <= 0.0 {
        return None;
    }
    let norm: Vec<[f64; 2]> = f
        .iter()
        .map(|v| [(v[0] - lo(0)) / r0, (v[1] - lo(1)) / r1])
        .collect();
    // extremes: best in each objective
    let a = norm
        .iter()
        .copied()
        .reduce(|b, v| if v[0] < b[0] { v } else { b })?;
    let b = norm
        .iter()
        .copied()
        .reduce(|b, v| if v[1] < b[1] { v } else { b })?;
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len = dx.hypot(dy);
    if len == 0.0 {
        return None;
    }
    let dist = |p: &[f64; 2]| ((p[0] - a[0]) * dy - (p[1] - a[1]) * dx).abs() / len;
    let mut best = 0;
    for i in 1..norm.len() {
        if dist(&norm[i]) > dist(&norm[best]) {
            best = i;
        }
    }
    Some(&front[best])
}
