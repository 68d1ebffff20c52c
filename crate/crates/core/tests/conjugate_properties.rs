//! Invariants of the tight conjugate on random inputs.

use myfd::conjugate::{conjugate, conjugate_value, SolverConfig};
use myfd::measures::divergence;
use myfd::{Generator, GeneratorSpec};
use proptest::prelude::*;

fn normalize(w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Strictly positive probability vector of length `n`.
fn positive_simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(normalize)
}

fn generator() -> impl Strategy<Value = GeneratorSpec> {
    prop::sample::select(Generator::ALL.to_vec()).prop_map(|g| g.spec())
}

fn legendre() -> impl Strategy<Value = GeneratorSpec> {
    prop::sample::select(Generator::LEGENDRE.to_vec()).prop_map(|g| g.spec())
}

/// `(f, ν)` with `f ∈ [−3, 3]ⁿ` and `ν` strictly positive.
fn potential_and_measure() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..8).prop_flat_map(|n| (prop::collection::vec(-3.0f64..3.0, n), positive_simplex(n)))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn shifting_f_shifts_the_value(spec in generator(), (f, nu) in potential_and_measure(), c in -10.0f64..10.0) {
        let cfg = SolverConfig::default();
        let a = conjugate_value(&spec, &f, &nu, &cfg).unwrap();
        let shifted: Vec<f64> = f.iter().map(|v| v + c).collect();
        let b = conjugate_value(&spec, &shifted, &nu, &cfg).unwrap();
        prop_assert!((b - a - c).abs() <= 1e-8, "{} {a} {b} {c}", spec.name());
    }

    #[test]
    fn value_is_monotone(
        spec in generator(),
        (f, nu) in potential_and_measure(),
        bumps in prop::collection::vec(0.0f64..1.0, 8),
    ) {
        let cfg = SolverConfig::default();
        let larger: Vec<f64> = f.iter().zip(&bumps).map(|(v, b)| v + b).collect();
        let a = conjugate_value(&spec, &f, &nu, &cfg).unwrap();
        let b = conjugate_value(&spec, &larger, &nu, &cfg).unwrap();
        prop_assert!(b >= a - 1e-10, "{} {a} {b}", spec.name());
    }

    #[test]
    fn young_fenchel_inequality(spec in generator(), (f, nu) in potential_and_measure(), seed in prop::collection::vec(0.0f64..1.0, 8)) {
        let n = f.len();
        let mu = normalize(seed[..n].iter().map(|v| v + 1e-3).collect());
        let d = divergence(&spec, &mu, &nu);
        let c = conjugate_value(&spec, &f, &nu, &SolverConfig::default()).unwrap();
        prop_assert!(d + c >= dot(&mu, &f) - 1e-9, "{} {d} {c}", spec.name());
    }

    #[test]
    fn gradient_attains_young_fenchel(spec in generator(), (f, nu) in potential_and_measure()) {
        let c = conjugate(&spec, &f, &nu, &SolverConfig::default()).unwrap();
        let mu = &c.gradient;
        prop_assert!((mu.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        if spec.is_trivial() || spec.generator == Generator::TotalVariation {
            return Ok(());
        }
        let d = divergence(&spec, mu, &nu);
        let gap = d + c.value - dot(mu, &f);
        prop_assert!(gap.abs() <= 1e-8 * (1.0 + d.abs()), "{} gap {gap}", spec.name());
    }

    #[test]
    fn csiszar_potential_attains_equality(spec in legendre(), (mu, nu) in (2usize..8).prop_flat_map(|n| (positive_simplex(n), positive_simplex(n)))) {
        let map = spec.potential_from_ratio.unwrap();
        let f: Vec<f64> = mu.iter().zip(&nu).map(|(m, n)| map(m / n)).collect();
        let d = divergence(&spec, &mu, &nu);
        let c = conjugate_value(&spec, &f, &nu, &SolverConfig::default()).unwrap();
        let gap = d + c - dot(&mu, &f);
        prop_assert!(gap >= -1e-9 && gap <= 1e-8 * (1.0 + f.iter().fold(0.0f64, |m, v| m.max(v.abs()))), "{} gap {gap}", spec.name());
    }

    #[test]
    fn stabilization_does_not_change_values(spec in generator(), (f, nu) in potential_and_measure()) {
        let on = SolverConfig::default();
        let off = SolverConfig { stabilize: false, ..on };
        let a = conjugate_value(&spec, &f, &nu, &on).unwrap();
        let b = conjugate_value(&spec, &f, &nu, &off).unwrap();
        prop_assert!((a - b).abs() <= 1e-10, "{} {a} {b}", spec.name());
    }

    #[test]
    fn gamma_gradient_is_a_probability(spec in generator(), (f, nu) in potential_and_measure()) {
        let c = conjugate(&spec, &f, &nu, &SolverConfig::default()).unwrap();
        if c.gamma.converged {
            prop_assert!(c.gamma.grad.iter().all(|&g| g >= -1e-12));
            prop_assert!((c.gamma.grad.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        }
    }
}
