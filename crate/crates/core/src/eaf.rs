//! Empirical attainment surfaces for ensembles of bi-objective fronts.
//!
//! A point `z` is attained by a run when some member of that run's front
//! weakly dominates it. The level-`k` surface bounds the region attained by at
//! least `k` runs. In two objectives that region is
//! `{(a, b) : b >= h_k(a)}`, where `h_k(a)` is the `k`-th smallest over runs
//! of the best second objective among points with first objective `<= a`.
//! `h_k` only changes at observed first-objective values, so a single sweep
//! over them yields the exact staircase.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moea::{dominates, weakly_dominates, Objectives};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EafError {
    #[error("ensemble has no runs")]
    EmptyEnsemble,
    #[error("run {0} has an empty front")]
    EmptyRun(usize),
    #[error("run {0} contains a non-finite objective value")]
    NonFinite(usize),
    #[error("level {k} outside 1..={runs}")]
    InvalidLevel { k: usize, runs: usize },
}

/// Fronts from independent runs, both objectives minimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontEnsemble {
    runs: Vec<Vec<Objectives>>,
}

impl FrontEnsemble {
    /// Each run is reduced to its distinct non-dominated points, which leaves
    /// every attainment count unchanged.
    pub fn new(runs: Vec<Vec<Objectives>>) -> Result<Self, EafError> {
        if runs.is_empty() {
            return Err(EafError::EmptyEnsemble);
        }
        let mut clean = Vec::with_capacity(runs.len());
        for (r, run) in runs.into_iter().enumerate() {
            if run.is_empty() {
                return Err(EafError::EmptyRun(r));
            }
            if run.iter().flatten().any(|v| !v.is_finite()) {
                return Err(EafError::NonFinite(r));
            }
            let mut kept: Vec<Objectives> = Vec::new();
            for p in &run {
                if !run.iter().any(|q| dominates(q, p)) && !kept.contains(p) {
                    kept.push(*p);
                }
            }
            kept.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
            clean.push(kept);
        }
        Ok(Self { runs: clean })
    }

    pub fn runs(&self) -> &[Vec<Objectives>] {
        &self.runs
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Number of runs with a point weakly dominating `query`.
    pub fn attained_count(&self, query: &Objectives) -> usize {
        self.runs
            .iter()
            .filter(|run| run.iter().any(|p| weakly_dominates(p, query)))
            .count()
    }

    /// Best, median and worst levels: `1`, `ceil(n / 2)`, `n`, deduplicated.
    pub fn standard_levels(&self) -> Vec<usize> {
        let n = self.len();
        let mut levels = vec![1, n.div_ceil(2), n];
        levels.dedup();
        levels
    }

    pub fn attainment_surface(&self, k: usize) -> Result<AttainmentSurface, EafError> {
        let runs = self.len();
        if k == 0 || k > runs {
            return Err(EafError::InvalidLevel { k, runs });
        }
        let mut events: Vec<(f64, f64, usize)> = self
            .runs
            .iter()
            .enumerate()
            .flat_map(|(r, run)| run.iter().map(move |p| (p[0], p[1], r)))
            .collect();
        events.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut best = vec![f64::INFINITY; runs];
        let mut points = Vec::new();
        let mut last = f64::INFINITY;
        let mut scratch = Vec::with_capacity(runs);
        let mut i = 0;
        while i < events.len() {
            let x = events[i].0;
            while i < events.len() && events[i].0 == x {
                let (_, f2, r) = events[i];
                if f2 < best[r] {
                    best[r] = f2;
                }
                i += 1;
            }
            scratch.clear();
            scratch.extend_from_slice(&best);
            let (_, h, _) = scratch.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
            let h = *h;
            if h < last {
                points.push([x, h]);
                last = h;
            }
        }
        Ok(AttainmentSurface { level: k, points })
    }
}

/// Staircase vertices, sorted by the first objective with the second strictly
/// decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttainmentSurface {
    pub level: usize,
    pub points: Vec<Objectives>,
}

impl AttainmentSurface {
    /// True when `z` lies in the region this surface bounds.
    pub fn attains(&self, z: &Objectives) -> bool {
        self.points.iter().any(|p| weakly_dominates(p, z))
    }

    /// Every vertex of `other` is attained by `self`.
    pub fn weakly_dominates(&self, other: &AttainmentSurface) -> bool {
        other.points.iter().all(|z| self.attains(z))
    }

    pub fn rows(&self) -> Vec<crate::io::EafRow> {
        self.points
            .iter()
            .map(|p| crate::io::EafRow {
                f1: p[0],
                f2: p[1],
                level: self.level,
            })
            .collect()
    }
}
