//! Real-coded NSGA-II for two minimized objectives.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded through
//! `seed_from_u64`, which produces the same stream on every platform. All
//! genetic operators draw from it sequentially on the calling thread; only
//! objective evaluation fans out, and its results are gathered in index order,
//! so serial and parallel runs are bit-identical.

mod operators;
mod sort;

pub use operators::{
    crowded_tournament, polynomial_mutation, sbx_beta, sbx_beta_bounded, sbx_crossover, sbx_pair,
    tournament_select,
};
pub use sort::{crowding_distance, dominates, fast_nondominated_sort, weakly_dominates};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Objective vector, both components minimized.
pub type Objectives = [f64; 2];

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct EvaluationError(pub String);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoeaError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("evaluation failed: {0}")]
    Evaluation(#[from] EvaluationError),
    #[error("objective vector {f:?} is not finite")]
    NonFiniteObjective { f: Objectives },
}

/// Per-variable box constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, MoeaError> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(MoeaError::InvalidBounds(format!(
                "{} lower vs {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(j) = (0..lower.len())
            .find(|&j| !lower[j].is_finite() || !upper[j].is_finite() || lower[j] >= upper[j])
        {
            return Err(MoeaError::InvalidBounds(format!(
                "variable {j}: [{}, {}]",
                lower[j], upper[j]
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn uniform(n: usize, lower: f64, upper: f64) -> Result<Self, MoeaError> {
        Self::new(vec![lower; n], vec![upper; n])
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn clip(&self, j: usize, v: f64) -> f64 {
        v.clamp(self.lower[j], self.upper[j])
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.len()
            && x.iter()
                .enumerate()
                .all(|(j, &v)| self.lower[j] <= v && v <= self.upper[j])
    }
}

/// A bi-objective minimization problem over a box.
pub trait Problem: Sync {
    fn bounds(&self) -> &Bounds;
    fn evaluate(&self, x: &[f64]) -> Result<Objectives, EvaluationError>;
}

/// Closure-backed [`Problem`].
pub struct FnProblem<F> {
    bounds: Bounds,
    f: F,
}

impl<F> FnProblem<F>
where
    F: Fn(&[f64]) -> Objectives + Sync,
{
    pub fn new(bounds: Bounds, f: F) -> Self {
        Self { bounds, f }
    }
}

impl<F> Problem for FnProblem<F>
where
    F: Fn(&[f64]) -> Objectives + Sync,
{
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> Result<Objectives, EvaluationError> {
        Ok((self.f)(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NsgaParams {
    pub pop_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub crossover_eta: f64,
    /// Probability that an offspring goes through mutation at all.
    pub mutation_prob: f64,
    /// Per-variable mutation rate once mutation applies; `None` means `1 / n_vars`.
    pub mutation_var_rate: Option<f64>,
    pub mutation_eta: f64,
    pub seed: u64,
    /// Evaluate objectives on the rayon pool. Does not change results.
    pub parallel: bool,
}

impl Default for NsgaParams {
    fn default() -> Self {
        Self {
            pop_size: 50,
            generations: 300,
            crossover_prob: 0.8,
            crossover_eta: 15.0,
            mutation_prob: 1.0,
            mutation_var_rate: None,
            mutation_eta: 20.0,
            seed: 0,
            parallel: true,
        }
    }
}

impl NsgaParams {
    pub fn validate(&self) -> Result<(), MoeaError> {
        let bad = |msg: String| Err(MoeaError::InvalidParams(msg));
        if self.pop_size < 4 {
            return bad(format!("pop_size {} must be >= 4", self.pop_size));
        }
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if !unit(self.crossover_prob) {
            return bad(format!(
                "crossover_prob {} outside [0, 1]",
                self.crossover_prob
            ));
        }
        if !unit(self.mutation_prob) {
            return bad(format!(
                "mutation_prob {} outside [0, 1]",
                self.mutation_prob
            ));
        }
        if let Some(r) = self.mutation_var_rate {
            if !unit(r) {
                return bad(format!("mutation_var_rate {r} outside [0, 1]"));
            }
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.crossover_eta) || !positive(self.mutation_eta) {
            return bad("distribution indices must be > 0".into());
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub x: Vec<f64>,
    pub f: Objectives,
    /// 0-based front index.
    pub rank: usize,
    pub crowding: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub front0_size: usize,
    pub best_f1: f64,
    pub best_f2: f64,
}

impl GenerationStats {
    fn of(generation: usize, pop: &[Individual]) -> Self {
        let front: Vec<&Individual> = pop.iter().filter(|i| i.rank == 0).collect();
        Self {
            generation,
            front0_size: front.len(),
            best_f1: front.iter().map(|i| i.f[0]).fold(f64::INFINITY, f64::min),
            best_f2: front.iter().map(|i| i.f[1]).fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NsgaResult {
    /// Rank-0 members of the final population.
    pub front: Vec<Individual>,
    pub population: Vec<Individual>,
    /// One entry per generation, including generation 0.
    pub trace: Vec<GenerationStats>,
}

pub fn run<P: Problem>(problem: &P, params: &NsgaParams) -> Result<NsgaResult, MoeaError> {
    run_with_observer(problem, params, |_, _| {})
}

/// Runs NSGA-II, calling `observer(generation, population)` after the initial
/// ranking and after every survivor selection.
pub fn run_with_observer<P, F>(
    problem: &P,
    params: &NsgaParams,
    mut observer: F,
) -> Result<NsgaResult, MoeaError>
where
    P: Problem,
    F: FnMut(usize, &[Individual]),
{
    params.validate()?;
    let bounds = problem.bounds();
    let n = params.pop_size;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let initial: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..bounds.len())
                .map(|j| rng.random_range(bounds.lower[j]..=bounds.upper[j]))
                .collect()
        })
        .collect();
    let mut pop = evaluate_all(problem, initial, params.parallel)?;
    rank_and_crowd(&mut pop);
    observer(0, &pop);
    let mut trace = vec![GenerationStats::of(0, &pop)];

    for generation in 1..=params.generations {
        let mut children = Vec::with_capacity(n);
        while children.len() < n {
            let a = tournament_select(&pop, &mut rng);
            let b = tournament_select(&pop, &mut rng);
            let (mut c1, mut c2) = sbx_crossover(&pop[a].x, &pop[b].x, bounds, params, &mut rng);
            polynomial_mutation(&mut c1, bounds, params, &mut rng);
            polynomial_mutation(&mut c2, bounds, params, &mut rng);
            children.push(c1);
            if children.len() < n {
                children.push(c2);
            }
        }
        let offspring = evaluate_all(problem, children, params.parallel)?;

        let mut merged = pop;
        merged.extend(offspring);
        pop = select_survivors(merged, n);
        observer(generation, &pop);
        trace.push(GenerationStats::of(generation, &pop));
    }

    let front = pop.iter().filter(|i| i.rank == 0).cloned().collect();
    Ok(NsgaResult {
        front,
        population: pop,
        trace,
    })
}

fn evaluate_all<P: Problem>(
    problem: &P,
    xs: Vec<Vec<f64>>,
    parallel: bool,
) -> Result<Vec<Individual>, MoeaError> {
    let eval = |x: Vec<f64>| -> Result<Individual, MoeaError> {
        let f = problem.evaluate(&x)?;
        if !f.iter().all(|v| v.is_finite()) {
            return Err(MoeaError::NonFiniteObjective { f });
        }
        Ok(Individual {
            x,
            f,
            rank: usize::MAX,
            crowding: 0.0,
        })
    };
    if parallel {
        xs.into_par_iter().map(eval).collect()
    } else {
        xs.into_iter().map(eval).collect()
    }
}

/// Assigns rank and crowding distance to every member.
fn rank_and_crowd(pop: &mut [Individual]) -> Vec<Vec<usize>> {
    let objectives: Vec<Objectives> = pop.iter().map(|i| i.f).collect();
    let fronts = fast_nondominated_sort(&objectives);
    for (rank, front) in fronts.iter().enumerate() {
        let fs: Vec<Objectives> = front.iter().map(|&i| objectives[i]).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&fs)) {
            pop[i].rank = rank;
            pop[i].crowding = d;
        }
    }
    fronts
}

/// Fills the next population front by front; the front that overflows is
/// truncated by descending crowding distance, ties kept in index order.
fn select_survivors(mut merged: Vec<Individual>, n: usize) -> Vec<Individual> {
    let fronts = rank_and_crowd(&mut merged);
    let mut keep = Vec::with_capacity(n);
    for front in fronts {
        if keep.len() + front.len() <= n {
            keep.extend(front);
            if keep.len() == n {
                break;
            }
        } else {
            let mut front = front;
            // stable sort keeps ascending index order among equal distances
            front.sort_by(|&a, &b| merged[b].crowding.total_cmp(&merged[a].crowding));
            keep.extend(front.into_iter().take(n - keep.len()));
            break;
        }
    }
    keep.sort_unstable();
    let mut slots: Vec<Option<Individual>> = merged.into_iter().map(Some).collect();
    keep.into_iter()
        .map(|i| slots[i].take().expect("each index kept once"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere() -> FnProblem<impl Fn(&[f64]) -> Objectives + Sync> {
        FnProblem::new(Bounds::uniform(10, -1.0, 1.0).unwrap(), |x: &[f64]| {
            let s: f64 = x.iter().map(|v| v * v).sum();
            [s, s]
        })
    }

    #[test]
    fn params_validation() {
        assert!(NsgaParams::default().validate().is_ok());
        assert!(NsgaParams {
            pop_size: 75,
            ..Default::default()
        }
        .validate()
        .is_ok());
        for bad in [
            NsgaParams {
                pop_size: 2,
                ..Default::default()
            },
            NsgaParams {
                crossover_prob: 1.5,
                ..Default::default()
            },
            NsgaParams {
                mutation_eta: 0.0,
                ..Default::default()
            },
            NsgaParams {
                mutation_var_rate: Some(-0.1),
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
        assert!(Bounds::new(vec![1.0], vec![1.0]).is_err());
        assert!(Bounds::new(vec![0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn odd_population_keeps_its_size() {
        let params = NsgaParams {
            generations: 5,
            pop_size: 7,
            ..Default::default()
        };
        let res = run(&sphere(), &params).unwrap();
        assert_eq!(res.population.len(), 7);
    }

    #[test]
    fn zero_generations_returns_initial_front() {
        let p = sphere();
        let params = NsgaParams {
            generations: 0,
            pop_size: 20,
            ..Default::default()
        };
        let res = run(&p, &params).unwrap();
        assert_eq!(res.population.len(), 20);
        let objs: Vec<Objectives> = res.population.iter().map(|i| i.f).collect();
        let expected = &fast_nondominated_sort(&objs)[0];
        assert_eq!(res.front.len(), expected.len());
        assert_eq!(res.trace.len(), 1);
    }

    #[test]
    fn single_optimum_collapses() {
        let p = sphere();
        let params = NsgaParams {
            generations: 200,
            pop_size: 40,
            seed: 11,
            ..Default::default()
        };
        let res = run(&p, &params).unwrap();
        let best = res
            .front
            .iter()
            .map(|i| i.f[0])
            .fold(f64::INFINITY, f64::min);
        assert!(best < 0.01, "best = {best}");
    }

    #[test]
    fn serial_and_parallel_agree() {
        let p = sphere();
        let params = NsgaParams {
            generations: 30,
            pop_size: 24,
            seed: 5,
            ..Default::default()
        };
        let a = run(
            &p,
            &NsgaParams {
                parallel: false,
                ..params.clone()
            },
        )
        .unwrap();
        let b = run(
            &p,
            &NsgaParams {
                parallel: true,
                ..params
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn evaluation_errors_propagate() {
        struct Failing(Bounds);
        impl Problem for Failing {
            fn bounds(&self) -> &Bounds {
                &self.0
            }
            fn evaluate(&self, _: &[f64]) -> Result<Objectives, EvaluationError> {
                Err(EvaluationError("boom".into()))
            }
        }
        let p = Failing(Bounds::uniform(2, 0.0, 1.0).unwrap());
        assert_eq!(
            run(&p, &NsgaParams::default()),
            Err(MoeaError::Evaluation(EvaluationError("boom".into())))
        );
        let nan = FnProblem::new(Bounds::uniform(1, 0.0, 1.0).unwrap(), |_: &[f64]| {
            [f64::NAN, 0.0]
        });
        assert!(matches!(
            run(&nan, &NsgaParams::default()),
            Err(MoeaError::NonFiniteObjective { .. })
        ));
    }

    #[test]
    fn survivors_fill_by_front_then_crowding() {
        let mk = |f: Objectives| Individual {
            x: vec![],
            f,
            rank: 0,
            crowding: 0.0,
        };
        let merged = vec![
            mk([0.0, 4.0]),
            mk([1.0, 3.0]),
            mk([1.5, 2.9]),
            mk([4.0, 0.0]),
            mk([5.0, 5.0]),
            mk([6.0, 6.0]),
        ];
        let next = select_survivors(merged, 3);
        let fs: Vec<Objectives> = next.iter().map(|i| i.f).collect();
        // extremes survive; of the two interior points the one with more room stays
        assert_eq!(fs, vec![[0.0, 4.0], [1.5, 2.9], [4.0, 0.0]]);
    }
}
