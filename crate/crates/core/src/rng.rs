//! Seeded random instances. Every stochastic routine in the crate draws from
//! a [`ChaCha8Rng`] built from a single `u64` seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::measures::FiniteMetricSpace;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw from the probability simplex (flat Dirichlet).
pub fn simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

/// Random metric on `n` points: symmetric edge weights in `[0.5, 2)`,
/// completed to shortest-path distances.
pub fn metric_space<R: Rng + ?Sized>(rng: &mut R, n: usize) -> FiniteMetricSpace {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = rng.random_range(0.5..2.0);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    FiniteMetricSpace::shortest_path_closure(d).expect("positive weights give a metric")
}

/// Vector with entries uniform in `[lo, hi)`.
pub fn uniform_vec<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}
