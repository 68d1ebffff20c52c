//! Invariants of exact f-divergences on random probability pairs.

use myfd::measures::{divergence, exact_divergence, DiscreteMeasure};
use myfd::Generator;
use proptest::prelude::*;

fn normalize(w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Probability pair of equal length; roughly a fifth of the atoms are empty.
fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..10).prop_flat_map(|n| {
        let atom = prop_oneof![1 => Just(0.0), 4 => 0.01f64..1.0];
        (
            prop::collection::vec(atom.clone(), n),
            prop::collection::vec(atom, n),
        )
            .prop_filter("nonzero mass", |(a, b)| a.iter().sum::<f64>() > 0.0 && b.iter().sum::<f64>() > 0.0)
            .prop_map(|(a, b)| (normalize(a), normalize(b)))
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn nonnegative_and_zero_only_on_equal((mu, nu) in pair()) {
        for g in Generator::DIVERGENCES {
            let d = divergence(&g.spec(), &mu, &nu);
            prop_assert!(d >= -1e-12, "{g} {d}");
            prop_assert!(divergence(&g.spec(), &mu, &mu).abs() <= 1e-12, "{g}");
            let same = mu.iter().zip(&nu).all(|(a, b)| (a - b).abs() <= 1e-12);
            if !same {
                prop_assert!(d > 1e-12, "{g} vanishes on distinct measures");
            }
        }
    }

    #[test]
    fn symmetric_generators((mu, nu) in pair()) {
        for g in [
            Generator::JensenShannon,
            Generator::Jeffreys,
            Generator::Triangular,
            Generator::TotalVariation,
            Generator::SquaredHellinger,
        ] {
            let a = divergence(&g.spec(), &mu, &nu);
            let b = divergence(&g.spec(), &nu, &mu);
            prop_assert!(close(a, b, 1e-10), "{g} {a} {b}");
        }
    }

    #[test]
    fn reverse_pairs((mu, nu) in pair()) {
        for (g, r) in [(Generator::Kl, Generator::ReverseKl), (Generator::Chi2, Generator::ReverseChi2)] {
            let a = divergence(&g.spec(), &mu, &nu);
            let b = divergence(&r.spec(), &nu, &mu);
            prop_assert!(close(a, b, 1e-10), "{g} {a} {b}");
        }
    }

    #[test]
    fn total_variation_is_l1_distance((mu, nu) in pair()) {
        let d = exact_divergence(
            &Generator::TotalVariation.spec(),
            &DiscreteMeasure::probability(mu.clone()).unwrap(),
            &DiscreteMeasure::probability(nu.clone()).unwrap(),
        )
        .unwrap();
        let l1: f64 = mu.iter().zip(&nu).map(|(a, b)| (a - b).abs()).sum();
        prop_assert!((d - l1).abs() <= 1e-12, "{d} {l1}");
    }
}
