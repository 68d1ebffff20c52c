//! Moreau-Yosida values against brute-force minimization and its
//! structural properties on seeded instances.

use myfd::measures::{divergence, DiscreteMeasure, FiniteMetricSpace};
use myfd::moreau_yosida::{my_dual, my_primal, MYConfig, MYParams};
use myfd::rng::{metric_space, seeded, simplex};
use myfd::transport::w1_distance;
use myfd::{Generator, GeneratorSpec};

fn instance(seed: u64, n: usize) -> (FiniteMetricSpace, DiscreteMeasure, DiscreteMeasure) {
    let mut rng = seeded(seed);
    let space = metric_space(&mut rng, n);
    let mu = DiscreteMeasure::probability(simplex(&mut rng, n)).unwrap();
    let nu = DiscreteMeasure::probability(simplex(&mut rng, n)).unwrap();
    (space, mu, nu)
}

fn value(spec: &GeneratorSpec, space: &FiniteMetricSpace, mu: &DiscreteMeasure, nu: &DiscreteMeasure, params: &MYParams) -> f64 {
    my_primal(spec, space, mu, nu, params, &MYConfig::default()).unwrap().value
}

/// Objective `D_φ(ξ‖ν) + λ W₁(μ, ξ)^α` at a candidate `ξ`.
fn objective(spec: &GeneratorSpec, space: &FiniteMetricSpace, mu: &[f64], nu: &[f64], xi: &[f64], lambda: f64, alpha: f64) -> f64 {
    divergence(spec, xi, nu) + lambda * w1_distance(space, mu, xi).unwrap().powf(alpha)
}

const SPECS: [Generator; 5] = [
    Generator::Kl,
    Generator::Chi2,
    Generator::SquaredHellinger,
    Generator::JensenShannon,
    Generator::TotalVariation,
];

#[test]
fn two_points_match_a_fine_line_search() {
    for seed in 0..10 {
        let (space, mu, nu) = instance(100 + seed, 2);
        for g in SPECS {
            let spec = g.spec();
            for (lambda, alpha) in [(0.5, 1.0), (2.0, 1.0), (1.0, 2.0), (3.0, 1.5)] {
                let params = MYParams::new(lambda, alpha).unwrap();
                let v = value(&spec, &space, &mu, &nu, &params);
                // Coarse scan, then golden-section refinement around the best cell.
                let f = |t: f64| objective(&spec, &space, mu.weights(), nu.weights(), &[t, 1.0 - t], lambda, alpha);
                let steps = 20_000;
                let best = (0..=steps).map(|k| k as f64 / steps as f64).fold((0.0, f64::INFINITY), |b, t| {
                    let v = f(t);
                    if v < b.1 { (t, v) } else { b }
                });
                let (mut a, mut b) = ((best.0 - 1.0 / steps as f64).max(0.0), (best.0 + 1.0 / steps as f64).min(1.0));
                let r = 0.5 * (5f64.sqrt() - 1.0);
                for _ in 0..100 {
                    let (x1, x2) = (b - r * (b - a), a + r * (b - a));
                    if f(x1) <= f(x2) { b = x2 } else { a = x1 }
                }
                let oracle = best.1.min(f(0.5 * (a + b)));
                assert!(v <= oracle + 1e-9, "{g} seed {seed}: {v} vs {oracle}");
                assert!(oracle - v <= 1e-7 * (1.0 + v), "{g} seed {seed}: {v} vs {oracle}");
            }
        }
    }
}

#[test]
fn three_points_match_a_simplex_grid() {
    let steps = 120;
    for seed in 0..4 {
        let (space, mu, nu) = instance(200 + seed, 3);
        for g in [Generator::Kl, Generator::Chi2] {
            let spec = g.spec();
            let (lambda, alpha) = (1.0, 2.0);
            let v = value(&spec, &space, &mu, &nu, &MYParams::new(lambda, alpha).unwrap());
            let mut grid_min = f64::INFINITY;
            for i in 0..=steps {
                for j in 0..=(steps - i) {
                    let xi = [i as f64 / steps as f64, j as f64 / steps as f64, (steps - i - j) as f64 / steps as f64];
                    grid_min = grid_min.min(objective(&spec, &space, mu.weights(), nu.weights(), &xi, lambda, alpha));
                }
            }
            assert!(v <= grid_min + 1e-9, "{g} seed {seed}: {v} vs {grid_min}");
            assert!(grid_min - v <= 2e-3, "{g} seed {seed}: {v} vs {grid_min}");
        }
    }
}

#[test]
fn vanishes_only_on_equal_measures() {
    for seed in 0..20 {
        let (space, mu, nu) = instance(300 + seed, 4);
        for g in SPECS {
            let spec = g.spec();
            let params = MYParams::new(1.0, 2.0).unwrap();
            assert!(value(&spec, &space, &mu, &mu, &params).abs() <= 1e-8, "{g}");
            assert!(value(&spec, &space, &mu, &nu, &params) > 1e-8, "{g} seed {seed}");
        }
    }
}

#[test]
fn exponent_one_is_the_limit_of_larger_exponents() {
    for seed in 0..20 {
        let (space, mu, nu) = instance(400 + seed, 4);
        for g in [Generator::Kl, Generator::Chi2, Generator::JensenShannon] {
            let spec = g.spec();
            let base = value(&spec, &space, &mu, &nu, &MYParams::new(1.0, 1.0).unwrap());
            let gaps: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
                .iter()
                .map(|eps| (value(&spec, &space, &mu, &nu, &MYParams::new(1.0, 1.0 + eps).unwrap()) - base).abs())
                .collect();
            for w in gaps.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "{g} seed {seed}: {gaps:?}");
            }
            assert!(gaps[3] <= 0.05 * (1.0 + base), "{g} seed {seed}: {gaps:?}");
        }
    }
}

#[test]
fn ball_form_vanishes_exactly_inside_the_ball() {
    for seed in 0..20 {
        let (space, mu, nu) = instance(500 + seed, 4);
        let w1 = w1_distance(&space, mu.weights(), nu.weights()).unwrap();
        for g in [Generator::Kl, Generator::Chi2] {
            let spec = g.spec();
            let inside = value(&spec, &space, &mu, &nu, &MYParams::ball(1.5 * w1).unwrap());
            let outside = value(&spec, &space, &mu, &nu, &MYParams::ball(0.5 * w1).unwrap());
            assert!(inside.abs() <= 1e-8, "{g} seed {seed}: {inside}");
            assert!(outside > 1e-8, "{g} seed {seed}: {outside}");
            let d = my_dual(&spec, &space, &mu, &nu, &MYParams::ball(0.5 * w1).unwrap(), &MYConfig::default()).unwrap();
            assert!((d.value - outside).abs() <= 1e-6 * (1.0 + outside), "{g} seed {seed}");
        }
    }
}
