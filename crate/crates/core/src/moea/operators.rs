use rand::Rng;

use super::{Bounds, Individual, NsgaParams};

/// Spread factor of simulated binary crossover for a uniform draw `u`.
pub fn sbx_beta(u: f64, eta: f64) -> f64 {
    sbx_beta_bounded(u, eta, f64::INFINITY)
}

/// Spread factor when the child may move at most `limit` parent gaps past
/// the nearer parent before leaving the box (`limit = 1 + 2 * room / gap`).
/// The distribution is renormalized so no probability mass falls outside.
pub fn sbx_beta_bounded(u: f64, eta: f64, limit: f64) -> f64 {
    let e = 1.0 / (eta + 1.0);
    let alpha = 2.0 - limit.powf(-(eta + 1.0));
    if u <= 1.0 / alpha {
        (u * alpha).powf(e)
    } else {
        (1.0 / (2.0 - u * alpha)).powf(e)
    }
}

/// SBX children of two parent values before clipping.
pub fn sbx_pair(p1: f64, p2: f64, beta: f64) -> (f64, f64) {
    (
        0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2),
        0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2),
    )
}

/// Bounded simulated binary crossover.
///
/// The pair is recombined with probability `crossover_prob`; each variable
/// then crosses with probability 0.5, and the two child values of a crossed
/// variable are handed to the children in random order. Children are clipped
/// to the bounds.
pub fn sbx_crossover<R: Rng>(
    p1: &[f64],
    p2: &[f64],
    bounds: &Bounds,
    params: &NsgaParams,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    if rng.random::<f64>() >= params.crossover_prob {
        return (c1, c2);
    }
    let eta = params.crossover_eta;
    for j in 0..p1.len() {
        if !rng.random_bool(0.5) {
            continue;
        }
        if (p1[j] - p2[j]).abs() <= 1e-14 {
            continue;
        }
        let (y1, y2) = (p1[j].min(p2[j]), p1[j].max(p2[j]));
        let (lo, hi) = (bounds.lower[j], bounds.upper[j]);
        let gap = y2 - y1;
        let u = rng.random::<f64>();
        let low_beta = sbx_beta_bounded(u, eta, 1.0 + 2.0 * (y1 - lo) / gap);
        let high_beta = sbx_beta_bounded(u, eta, 1.0 + 2.0 * (hi - y2) / gap);
        let a = bounds.clip(j, 0.5 * (y1 + y2 - low_beta * gap));
        let b = bounds.clip(j, 0.5 * (y1 + y2 + high_beta * gap));
        if rng.random_bool(0.5) {
            (c1[j], c2[j]) = (b, a);
        } else {
            (c1[j], c2[j]) = (a, b);
        }
    }
    (c1, c2)
}

/// Deb's bounded polynomial mutation.
///
/// Applied to the whole vector with probability `mutation_prob`; each
/// variable then mutates with the per-variable rate (default `1 / n_vars`).
pub fn polynomial_mutation<R: Rng>(
    x: &mut [f64],
    bounds: &Bounds,
    params: &NsgaParams,
    rng: &mut R,
) {
    if rng.random::<f64>() >= params.mutation_prob {
        return;
    }
    let rate = params.mutation_var_rate.unwrap_or(1.0 / x.len() as f64);
    let eta = params.mutation_eta;
    let pow = 1.0 / (eta + 1.0);
    for (j, v) in x.iter_mut().enumerate() {
        if rng.random::<f64>() >= rate {
            continue;
        }
        let (lo, hi) = (bounds.lower[j], bounds.upper[j]);
        let span = hi - lo;
        let d1 = (*v - lo) / span;
        let d2 = (hi - *v) / span;
        let r = rng.random::<f64>();
        let dq = if r < 0.5 {
            let xy = 1.0 - d1;
            let val = 2.0 * r + (1.0 - 2.0 * r) * xy.powf(eta + 1.0);
            val.powf(pow) - 1.0
        } else {
            let xy = 1.0 - d2;
            let val = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * xy.powf(eta + 1.0);
            1.0 - val.powf(pow)
        };
        *v = bounds.clip(j, *v + dq * span);
    }
}

/// Crowded comparison: lower rank wins, then larger crowding distance, then a coin flip.
pub fn crowded_tournament<R: Rng>(a: usize, b: usize, pop: &[Individual], rng: &mut R) -> usize {
    let (ia, ib) = (&pop[a], &pop[b]);
    if ia.rank != ib.rank {
        return if ia.rank < ib.rank { a } else { b };
    }
    if ia.crowding != ib.crowding {
        return if ia.crowding > ib.crowding { a } else { b };
    }
    if rng.random_bool(0.5) {
        a
    } else {
        b
    }
}

/// Binary tournament between two uniformly drawn members.
pub fn tournament_select<R: Rng>(pop: &[Individual], rng: &mut R) -> usize {
    let a = rng.random_range(0..pop.len());
    let b = rng.random_range(0..pop.len());
    crowded_tournament(a, b, pop, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_bounds(n: usize) -> Bounds {
        Bounds::new(vec![0.0; n], vec![1.0; n]).unwrap()
    }

    fn ind(rank: usize, crowding: f64) -> Individual {
        Individual {
            x: vec![0.0],
            f: [0.0, 0.0],
            rank,
            crowding,
        }
    }

    #[test]
    fn no_crossover_copies_parents() {
        let params = NsgaParams {
            crossover_prob: 0.0,
            ..NsgaParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = unit_bounds(3);
        let (c1, c2) = sbx_crossover(&[0.1, 0.2, 0.3], &[0.9, 0.8, 0.7], &b, &params, &mut rng);
        assert_eq!(c1, vec![0.1, 0.2, 0.3]);
        assert_eq!(c2, vec![0.9, 0.8, 0.7]);
    }

    #[test]
    fn identical_parents_are_a_fixed_point() {
        let params = NsgaParams {
            crossover_prob: 1.0,
            ..NsgaParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = unit_bounds(4);
        let p = [0.25, 0.5, 0.75, 0.1];
        for _ in 0..100 {
            let (c1, c2) = sbx_crossover(&p, &p, &b, &params, &mut rng);
            assert_eq!(c1, p);
            assert_eq!(c2, p);
        }
    }

    #[test]
    fn sbx_preserves_the_parent_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let p1: f64 = rng.random_range(-5.0..5.0);
            let p2: f64 = rng.random_range(-5.0..5.0);
            let beta = sbx_beta(rng.random(), 15.0);
            let (a, b) = sbx_pair(p1, p2, beta);
            assert!(((a + b) / 2.0 - (p1 + p2) / 2.0).abs() < 1e-12);
            // spread matches the formula directly
            assert!(((b - a).abs() - beta * (p1 - p2).abs()).abs() < 1e-12);
        }
        assert_eq!(sbx_beta(0.5, 15.0), 1.0);
    }

    #[test]
    fn bounded_sbx_stays_inside_without_clipping() {
        // with the renormalized spread, children land in the box on their own
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10_000 {
            let y1: f64 = rng.random_range(0.0..0.5);
            let y2: f64 = rng.random_range(0.5..1.0);
            let gap = y2 - y1;
            let u: f64 = rng.random();
            let lb = sbx_beta_bounded(u, 15.0, 1.0 + 2.0 * y1 / gap);
            let ub = sbx_beta_bounded(u, 15.0, 1.0 + 2.0 * (1.0 - y2) / gap);
            assert!(0.5 * (y1 + y2 - lb * gap) >= -1e-12);
            assert!(0.5 * (y1 + y2 + ub * gap) <= 1.0 + 1e-12);
        }
        // far from the bounds the unbounded factor is recovered
        assert!((sbx_beta_bounded(0.3, 15.0, 1e9) - sbx_beta(0.3, 15.0)).abs() < 1e-12);
    }

    #[test]
    fn crossover_keeps_children_in_bounds() {
        let params = NsgaParams {
            crossover_prob: 1.0,
            ..NsgaParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let b = unit_bounds(6);
        let p1 = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let p2 = [0.9, 0.8, 0.7, 0.6, 0.5, 0.4];
        for _ in 0..1000 {
            let (c1, c2) = sbx_crossover(&p1, &p2, &b, &params, &mut rng);
            assert!(b.contains(&c1) && b.contains(&c2));
            for j in 0..6 {
                if p1[j] == p2[j] {
                    assert_eq!((c1[j], c2[j]), (p1[j], p2[j]));
                }
            }
        }
    }

    #[test]
    fn zero_rate_mutation_is_identity() {
        let params = NsgaParams {
            mutation_var_rate: Some(0.0),
            ..NsgaParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut x = vec![0.3, 0.6];
        polynomial_mutation(&mut x, &unit_bounds(2), &params, &mut rng);
        assert_eq!(x, vec![0.3, 0.6]);
    }

    #[test]
    fn mutation_stays_in_bounds() {
        let params = NsgaParams {
            mutation_var_rate: Some(1.0),
            ..NsgaParams::default()
        };
        let b = Bounds::new(vec![-0.5, 0.0], vec![0.5, 1e-3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100_000 {
            let mut x = vec![rng.random_range(-0.5..=0.5), rng.random_range(0.0..=1e-3)];
            polynomial_mutation(&mut x, &b, &params, &mut rng);
            assert!(b.contains(&x), "{x:?}");
        }
    }

    #[test]
    fn larger_eta_gives_smaller_perturbations() {
        let b = unit_bounds(1);
        let mut last = f64::INFINITY;
        for eta in [1.0, 5.0, 20.0, 100.0] {
            let params = NsgaParams {
                mutation_eta: eta,
                mutation_var_rate: Some(1.0),
                ..NsgaParams::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            let trials = 20_000;
            let var = (0..trials)
                .map(|_| {
                    let mut x = vec![0.5];
                    polynomial_mutation(&mut x, &b, &params, &mut rng);
                    (x[0] - 0.5).powi(2)
                })
                .sum::<f64>()
                / trials as f64;
            assert!(var < last, "eta {eta}: {var} !< {last}");
            last = var;
        }
    }

    #[test]
    fn tournament_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pop = vec![ind(0, 0.1), ind(1, 9.0), ind(2, f64::INFINITY), ind(2, 1.0)];
        assert_eq!(crowded_tournament(0, 1, &pop, &mut rng), 0);
        assert_eq!(crowded_tournament(1, 0, &pop, &mut rng), 0);
        assert_eq!(crowded_tournament(2, 3, &pop, &mut rng), 2);
        assert_eq!(crowded_tournament(3, 2, &pop, &mut rng), 2);
    }

    #[test]
    fn full_ties_are_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pop = vec![ind(1, 2.0), ind(1, 2.0)];
        let trials = 10_000;
        let wins = (0..trials)
            .filter(|_| crowded_tournament(0, 1, &pop, &mut rng) == 0)
            .count();
        let share = wins as f64 / trials as f64;
        // 4 standard deviations of a fair coin over 10^4 draws
        assert!((share - 0.5).abs() < 0.02, "share = {share}");
    }
}
