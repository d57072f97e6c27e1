//! Cao's method for the minimum embedding dimension.
//!
//! For each dimension `d` the nearest neighbor of every delay vector is found
//! under the maximum-coordinate norm. `E(d)` averages how much that distance
//! grows when one more coordinate is appended; `E*(d)` averages the distance
//! in the appended coordinate alone. `E1 = E(d+1)/E(d)` saturates near 1 once
//! the attractor is unfolded, while `E2 = E*(d+1)/E*(d)` stays near 1 for
//! every `d` on stochastic data.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ChaosError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CaoOptions {
    pub max_dim: usize,
    pub threshold: f64,
}

impl Default for CaoOptions {
    fn default() -> Self {
        Self {
            max_dim: 12,
            threshold: 0.05,
        }
    }
}

/// How the reported dimension was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Saturation {
    /// `|E1 - 1| < threshold` from `m` through `max_dim`.
    Persistent,
    /// Finite-sample drift broke the persistent condition at high `d`; `m` is
    /// the first `d` where the condition holds at both `d` and `d + 1`.
    Local,
    /// Neither held; `m = max_dim`.
    NotReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaoResult {
    pub m: usize,
    pub saturation: Saturation,
    /// `E1(d)` for `d = 1..=max_dim`.
    pub e1: Vec<f64>,
    /// `E2(d)` for `d = 1..=max_dim`.
    pub e2: Vec<f64>,
}

pub fn cao_min_dimension(
    values: &[f64],
    tau: usize,
    max_dim: usize,
    threshold: f64,
) -> Result<CaoResult, ChaosError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(ChaosError::InvalidThreshold(threshold));
    }
    if tau == 0 || max_dim == 0 {
        return Err(ChaosError::InvalidParams { tau, m: max_dim });
    }
    let n = values.len();
    let required = (max_dim + 1) * tau + 2;
    if n < required {
        return Err(ChaosError::SeriesTooShort { len: n, required });
    }

    // `dist[i * stride + j]` holds the max-norm distance between the
    // d-dimensional vectors i and j, grown one coordinate per dimension.
    let stride = n - tau;
    let mut dist = vec![0.0f64; stride * stride];

    let mut e = Vec::with_capacity(max_dim + 1);
    let mut e_star = Vec::with_capacity(max_dim + 1);
    for d in 1..=max_dim + 1 {
        let count = n - d * tau;
        let shift = (d - 1) * tau;
        dist[..count * stride]
            .par_chunks_mut(stride)
            .enumerate()
            .for_each(|(i, row)| {
                let xi = values[i + shift];
                for (j, cell) in row[..count].iter_mut().enumerate() {
                    let step = (xi - values[j + shift]).abs();
                    if step > *cell {
                        *cell = step;
                    }
                }
            });

        let next = d * tau;
        let terms: Vec<Option<(f64, f64)>> = (0..count)
            .into_par_iter()
            .map(|i| {
                let row = &dist[i * stride..i * stride + count];
                // nearest neighbor with nonzero distance (zero-distance ties fall through)
                let (nn, dn) = row
                    .iter()
                    .enumerate()
                    .filter(|&(j, &v)| j != i && v > 0.0)
                    .fold(None, |best: Option<(usize, f64)>, (j, &v)| match best {
                        Some((_, bv)) if bv <= v => best,
                        _ => Some((j, v)),
                    })?;
                let appended = (values[i + next] - values[nn + next]).abs();
                Some((dn.max(appended) / dn, appended))
            })
            .collect();

        let mut sum_a = 0.0;
        let mut sum_star = 0.0;
        let mut used = 0usize;
        for (a, s) in terms.into_iter().flatten() {
            sum_a += a;
            sum_star += s;
            used += 1;
        }
        if used == 0 {
            return Err(ChaosError::DegenerateNeighbors { dim: d });
        }
        e.push(sum_a / used as f64);
        e_star.push(sum_star / used as f64);
    }

    let e1: Vec<f64> = e.windows(2).map(|w| w[1] / w[0]).collect();
    let e2: Vec<f64> = e_star.windows(2).map(|w| ratio(w[1], w[0])).collect();

    let within = |v: &f64| (v - 1.0).abs() < threshold;
    // walk back from the largest dimension while the condition holds
    let tail = e1.iter().rev().take_while(|v| within(v)).count();
    let (m, saturation) = if tail > 0 {
        (max_dim - tail + 1, Saturation::Persistent)
    } else if let Some(d) = e1.windows(2).position(|w| within(&w[0]) && within(&w[1])) {
        (d + 1, Saturation::Local)
    } else {
        (max_dim, Saturation::NotReached)
    };
    Ok(CaoResult {
        m,
        saturation,
        e1,
        e2,
    })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Direct O(n^2 d) evaluation of E(d) and E*(d).
    fn e_oracle(x: &[f64], tau: usize, d: usize) -> (f64, f64) {
        let count = x.len() - d * tau;
        let v = |i: usize, dim: usize| (0..dim).map(move |k| x[i + k * tau]);
        let norm = |i: usize, j: usize, dim: usize| {
            v(i, dim)
                .zip(v(j, dim))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let (mut sa, mut ss, mut used) = (0.0, 0.0, 0);
        for i in 0..count {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..count {
                let dj = norm(i, j, d);
                if j != i && dj > 0.0 && best.is_none_or(|(_, b)| dj < b) {
                    best = Some((j, dj));
                }
            }
            let Some((nn, dn)) = best else { continue };
            sa += norm(i, nn, d + 1) / dn;
            ss += (x[i + d * tau] - x[nn + d * tau]).abs();
            used += 1;
        }
        (sa / used as f64, ss / used as f64)
    }

    fn logistic(n: usize) -> Vec<f64> {
        let mut x = vec![0.1234];
        for i in 1..n {
            let p = x[i - 1];
            x.push(4.0 * p * (1.0 - p));
        }
        x
    }

    #[test]
    fn curves_match_brute_force() {
        let x = logistic(300);
        let res = cao_min_dimension(&x, 1, 5, 0.05).unwrap();
        let es: Vec<(f64, f64)> = (1..=6).map(|d| e_oracle(&x, 1, d)).collect();
        for d in 0..5 {
            let e1 = es[d + 1].0 / es[d].0;
            let e2 = es[d + 1].1 / es[d].1;
            assert!((res.e1[d] - e1).abs() < 1e-12, "E1({})", d + 1);
            assert!((res.e2[d] - e2).abs() < 1e-12, "E2({})", d + 1);
        }
    }

    #[test]
    fn logistic_map_is_low_dimensional() {
        let x = logistic(2000);
        let res = cao_min_dimension(&x, 1, 8, 0.05).unwrap();
        assert_eq!(res.saturation, Saturation::Persistent);
        assert!(res.m <= 3, "m = {}", res.m);
        for v in &res.e1[res.m - 1..] {
            assert!((v - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn noise_has_flat_e2() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..2000).map(|_| rng.random::<f64>()).collect();
        let res = cao_min_dimension(&x, 1, 8, 0.05).unwrap();
        for (d, v) in res.e2.iter().enumerate() {
            assert!((v - 1.0).abs() < 0.1, "E2({}) = {v}", d + 1);
        }
        // E1 climbs slowly on noise
        assert!(res.e1[0] < 0.5);
    }

    #[test]
    fn high_dimension_drift_falls_back_to_local_saturation() {
        // 1500 points cannot support E1 near 1 all the way to d = 12
        let x = logistic(1500);
        let res = cao_min_dimension(&x, 1, 12, 0.05).unwrap();
        assert_eq!(res.saturation, Saturation::Local);
        assert_eq!(res.m, 2);
    }

    #[test]
    fn affine_invariant_dimension() {
        let x = logistic(500);
        let y: Vec<f64> = x.iter().map(|v| 250.0 * v + 3.0).collect();
        let a = cao_min_dimension(&x, 1, 6, 0.05).unwrap();
        let b = cao_min_dimension(&y, 1, 6, 0.05).unwrap();
        assert_eq!(a.m, b.m);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            cao_min_dimension(&[1.0; 5], 1, 4, 0.05),
            Err(ChaosError::SeriesTooShort { .. })
        ));
        assert!(matches!(
            cao_min_dimension(&[1.0; 50], 1, 4, 1.5),
            Err(ChaosError::InvalidThreshold(_))
        ));
        assert_eq!(
            cao_min_dimension(&[1.0; 50], 1, 4, 0.05),
            Err(ChaosError::DegenerateNeighbors { dim: 1 })
        );
    }
}
