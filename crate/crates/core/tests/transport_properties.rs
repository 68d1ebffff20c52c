//! Metric axioms of W₁ and the Kantorovich–Rubinstein bound.

use myfd::measures::FiniteMetricSpace;
use myfd::rng::{metric_space, seeded, simplex, uniform_vec};
use myfd::transport::{kantorovich_potential, lipschitz_envelope, lipschitz_norm, w1_distance, w1_plan};
use proptest::prelude::*;

fn setup(seed: u64, n: usize) -> (FiniteMetricSpace, Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut rng = seeded(seed);
    let space = metric_space(&mut rng, n);
    let a = simplex(&mut rng, n);
    let b = simplex(&mut rng, n);
    let c = simplex(&mut rng, n);
    (space, a, b, c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metric_axioms(seed in any::<u64>(), n in 2usize..8) {
        let (space, a, b, c) = setup(seed, n);
        let ab = w1_distance(&space, &a, &b).unwrap();
        let ba = w1_distance(&space, &b, &a).unwrap();
        let ac = w1_distance(&space, &a, &c).unwrap();
        let cb = w1_distance(&space, &c, &b).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!(ab <= ac + cb + 1e-8);
        prop_assert!(w1_distance(&space, &a, &a).unwrap() <= 1e-9);
        if a.iter().zip(&b).any(|(x, y)| (x - y).abs() > 1e-6) {
            prop_assert!(ab > 1e-9);
        }
    }

    #[test]
    fn lipschitz_pairings_are_bounded_by_w1(seed in any::<u64>(), n in 2usize..8) {
        let (space, a, b, _) = setup(seed, n);
        let mut rng = seeded(seed ^ 0x5eed);
        let raw = uniform_vec(&mut rng, n, -3.0, 3.0);
        let g = lipschitz_envelope(&space, &raw, 1.0);
        prop_assert!(lipschitz_norm(&space, &g) <= 1.0 + 1e-12);
        let pairing: f64 = a.iter().zip(&b).zip(&g).map(|((x, y), v)| (x - y) * v).sum();
        prop_assert!(pairing <= w1_distance(&space, &a, &b).unwrap() + 1e-9);
    }

    #[test]
    fn plan_and_potential_certify_each_other(seed in any::<u64>(), n in 2usize..10) {
        let (space, a, b, _) = setup(seed, n);
        let plan = w1_plan(&space, &a, &b).unwrap();
        let (cost, f) = kantorovich_potential(&space, &a, &b).unwrap();
        prop_assert!((plan.cost - cost).abs() <= 1e-12);
        let pairing: f64 = a.iter().zip(&b).zip(&f).map(|((x, y), v)| (x - y) * v).sum();
        prop_assert!((pairing - cost).abs() <= 1e-9);
        prop_assert!(lipschitz_norm(&space, &f) <= 1.0 + 1e-9);
        prop_assert!(f[0] == 0.0);
        for (r, m) in plan.row_sums().iter().zip(&a) {
            prop_assert!((r - m).abs() <= 1e-12);
        }
        for (c, m) in plan.col_sums().iter().zip(&b) {
            prop_assert!((c - m).abs() <= 1e-12);
        }
    }
}

#[test]
fn points_on_a_line_match_cumulative_distribution_distance() {
    let coords = [0.0, 0.3, 1.1, 2.0, 3.7];
    let space = FiniteMetricSpace::line(&coords).unwrap();
    let mut rng = seeded(11);
    for _ in 0..50 {
        let a = simplex(&mut rng, coords.len());
        let b = simplex(&mut rng, coords.len());
        let mut cdf = 0.0;
        let mut oracle = 0.0;
        for i in 0..coords.len() - 1 {
            cdf += a[i] - b[i];
            oracle += cdf.abs() * (coords[i + 1] - coords[i]);
        }
        assert!((w1_distance(&space, &a, &b).unwrap() - oracle).abs() <= 1e-12);
    }
}
