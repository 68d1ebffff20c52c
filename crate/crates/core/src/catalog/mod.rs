//! Divergence generators.
//!
//! Each generator `φ` (convex, `φ(1) = 0`) is described by its restriction
//! `φ₊ = φ + i_{ℝ₊}` to the nonnegative half-line, the convex conjugate `φ₊*`
//! with its first two derivatives, and the recession slope `φ'(∞)`.
//!
//! | name | φ(x) | φ'(∞) |
//! |---|---|---|
//! | `kl` | x log x − x + 1 | ∞ |
//! | `reverse_kl` | x − 1 − log x | 1 |
//! | `chi2` | (x − 1)² | ∞ |
//! | `reverse_chi2` | 1/x + x − 2 | 1 |
//! | `squared_hellinger` | (√x − 1)² | 1 |
//! | `jensen_shannon` | x log x − (x + 1) log((x + 1)/2) | log 2 |
//! | `jeffreys` | (x − 1) log x | ∞ |
//! | `triangular` | (x − 1)²/(x + 1) | 1 |
//! | `total_variation` | \|x − 1\| | 1 |
//! | `trivial` | i_{1}(x) | ∞ |
//!
//! Outside the effective domain every function returns `+∞` (IEEE infinity);
//! nothing here panics on out-of-domain input. At the kinks of piecewise
//! conjugates the right-continuous branch is used, with closed boundaries
//! as in the tables above.

mod lambert;

pub use lambert::{lambert_w, lambert_w_exp, lambert_w_grad, BRANCH_POINT};

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const INF: f64 = f64::INFINITY;

/// Stable identifiers of the supported generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Kl,
    ReverseKl,
    Chi2,
    ReverseChi2,
    SquaredHellinger,
    JensenShannon,
    Jeffreys,
    Triangular,
    TotalVariation,
    Trivial,
}

impl Generator {
    pub const ALL: [Generator; 10] = [
        Generator::Kl,
        Generator::ReverseKl,
        Generator::Chi2,
        Generator::ReverseChi2,
        Generator::SquaredHellinger,
        Generator::JensenShannon,
        Generator::Jeffreys,
        Generator::Triangular,
        Generator::TotalVariation,
        Generator::Trivial,
    ];

    /// The nine proper f-divergences (everything except `trivial`).
    pub const DIVERGENCES: [Generator; 9] = [
        Generator::Kl,
        Generator::ReverseKl,
        Generator::Chi2,
        Generator::ReverseChi2,
        Generator::SquaredHellinger,
        Generator::JensenShannon,
        Generator::Jeffreys,
        Generator::Triangular,
        Generator::TotalVariation,
    ];

    /// Generators of Legendre type, i.e. those with a Csiszár-potential map.
    pub const LEGENDRE: [Generator; 8] = [
        Generator::Kl,
        Generator::ReverseKl,
        Generator::Chi2,
        Generator::ReverseChi2,
        Generator::SquaredHellinger,
        Generator::JensenShannon,
        Generator::Jeffreys,
        Generator::Triangular,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Generator::Kl => "kl",
            Generator::ReverseKl => "reverse_kl",
            Generator::Chi2 => "chi2",
            Generator::ReverseChi2 => "reverse_chi2",
            Generator::SquaredHellinger => "squared_hellinger",
            Generator::JensenShannon => "jensen_shannon",
            Generator::Jeffreys => "jeffreys",
            Generator::Triangular => "triangular",
            Generator::TotalVariation => "total_variation",
            Generator::Trivial => "trivial",
        }
    }

    pub fn valid_names() -> String {
        Generator::ALL
            .iter()
            .map(|g| g.name())
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn spec(self) -> GeneratorSpec {
        match self {
            Generator::Kl => GeneratorSpec {
                generator: self,
                phi_plus: kl::phi_plus,
                phi_plus_d1: kl::phi_plus_d1,
                phi_plus_d2: kl::phi_plus_d2,
                phi_plus_conj: kl::conj,
                phi_plus_conj_d1: kl::conj_d1,
                phi_plus_conj_d2: kl::conj_d1,
                phi_prime_inf: INF,
                closed_form_gamma: Some(kl::gamma),
                closed_form_divergence: Some(kl::term),
                potential_from_ratio: Some(kl::phi_plus_d1),
                newton_applicable: true,
            },
            Generator::ReverseKl => GeneratorSpec {
                generator: self,
                phi_plus: reverse_kl::phi_plus,
                phi_plus_d1: reverse_kl::phi_plus_d1,
                phi_plus_d2: reverse_kl::phi_plus_d2,
                phi_plus_conj: reverse_kl::conj,
                phi_plus_conj_d1: reverse_kl::conj_d1,
                phi_plus_conj_d2: reverse_kl::conj_d2,
                phi_prime_inf: 1.0,
                closed_form_gamma: None,
                closed_form_divergence: Some(reverse_kl::term),
                potential_from_ratio: Some(reverse_kl::phi_plus_d1),
                newton_applicable: true,
            },
            Generator::Chi2 => GeneratorSpec {
                generator: self,
                phi_plus: chi2::phi_plus,
                phi_plus_d1: chi2::phi_plus_d1,
                phi_plus_d2: chi2::phi_plus_d2,
                phi_plus_conj: chi2::conj,
                phi_plus_conj_d1: chi2::conj_d1,
                phi_plus_conj_d2: chi2::conj_d2,
                phi_prime_inf: INF,
                closed_form_gamma: None,
                closed_form_divergence: Some(chi2::term),
                potential_from_ratio: Some(chi2::phi_plus_d1),
                newton_applicable: true,
            },
            Generator::ReverseChi2 => GeneratorSpec {
                generator: self,
                phi_plus: reverse_chi2::phi_plus,
                phi_plus_d1: reverse_chi2::phi_plus_d1,
                phi_plus_d2: reverse_chi2::phi_plus_d2,
                phi_plus_conj: reverse_chi2::conj,
                phi_plus_conj_d1: reverse_chi2::conj_d1,
                phi_plus_conj_d2: reverse_chi2::conj_d2,
                phi_prime_inf: 1.0,
                closed_form_gamma: None,
                closed_form_divergence: Some(reverse_chi2::term),
                potential_from_ratio: Some(reverse_chi2::phi_plus_d1),
                newton_applicable: true,
            },
            Generator::SquaredHellinger => GeneratorSpec {
                generator: self,
                phi_plus: hellinger::phi_plus,
                phi_plus_d1: hellinger::phi_plus_d1,
                phi_plus_d2: hellinger::phi_plus_d2,
                phi_plus_conj: hellinger::conj,
                phi_plus_conj_d1: hellinger::conj_d1,
                phi_plus_conj_d2: hellinger::conj_d2,
                phi_prime_inf: 1.0,
                closed_form_gamma: None,
                closed_form_divergence: Some(hellinger::term),
                potential_from_ratio: Some(hellinger::phi_plus_d1),
                newton_applicable: true,
            },
            Generator::JensenShannon => GeneratorSpec {
                generator: self,
                phi_plus: jensen_shannon::phi_plus,
                phi_plus_d1: jensen_shannon::phi_plus_d1,
                phi_plus_d2: jensen_shannon::phi_plus_d2,
                phi_plus_conj: jensen_shannon::conj,
                phi_plus_conj_d1: jensen_shannon::conj_d1,
                phi_plus_conj_d2: jensen_shannon::conj_d2,
                phi_prime_inf: LN_2,
                closed_form_gamma: None,
                closed_form_divergence: Some(jensen_shannon::term),
                potential_from_ratio: Some(jensen_shannon::phi_plus_d1),
                newton_applicable: true,
            },
            Generator::Jeffreys => GeneratorSpec {
                generator: self,
                phi_plus: jeffreys::phi_plus,
                phi_plus_d1: jeffreys::phi_plus_d1,
                phi_plus_d2: jeffreys::phi_plus_d2,
                phi_plus_conj: jeffreys::conj,
                phi_plus_conj_d1: jeffreys::conj_d1,
                phi_plus_conj_d2: jeffreys::conj_d2,
                phi_prime_inf: INF,
                closed_form_gamma: None,
                closed_form_divergence: Some(jeffreys::term),
                potential_from_ratio: Some(jeffreys::phi_plus_d1),
                newton_applicable: true,
            },
            Generator::Triangular => GeneratorSpec {
                generator: self,
                phi_plus: triangular::phi_plus,
                phi_plus_d1: triangular::phi_plus_d1,
                phi_plus_d2: triangular::phi_plus_d2,
                phi_plus_conj: triangular::conj,
                phi_plus_conj_d1: triangular::conj_d1,
                phi_plus_conj_d2: triangular::conj_d2,
                phi_prime_inf: 1.0,
                closed_form_gamma: None,
                closed_form_divergence: Some(triangular::term),
                potential_from_ratio: Some(triangular::phi_plus_d1),
                newton_applicable: true,
            },
            Generator::TotalVariation => GeneratorSpec {
                generator: self,
                phi_plus: total_variation::phi_plus,
                phi_plus_d1: total_variation::phi_plus_d1,
                phi_plus_d2: zero,
                phi_plus_conj: total_variation::conj,
                phi_plus_conj_d1: total_variation::conj_d1,
                phi_plus_conj_d2: total_variation::conj_d2,
                phi_prime_inf: 1.0,
                closed_form_gamma: Some(total_variation::gamma),
                closed_form_divergence: Some(total_variation::term),
                potential_from_ratio: None,
                newton_applicable: false,
            },
            Generator::Trivial => GeneratorSpec {
                generator: self,
                phi_plus: trivial::phi_plus,
                phi_plus_d1: zero,
                phi_plus_d2: zero,
                phi_plus_conj: trivial::conj,
                phi_plus_conj_d1: trivial::conj_d1,
                phi_plus_conj_d2: zero,
                phi_prime_inf: INF,
                closed_form_gamma: None,
                closed_form_divergence: None,
                potential_from_ratio: None,
                newton_applicable: false,
            },
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Generator::ALL
            .iter()
            .copied()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::UnknownGenerator {
                name: s.to_string(),
                valid: Generator::valid_names(),
            })
    }
}

/// Table of functions derived from one generator.
///
/// Plain function pointers, so a spec is `Copy` and freely shared across
/// threads.
#[derive(Clone, Copy)]
pub struct GeneratorSpec {
    pub generator: Generator,
    /// `φ₊`.
    pub phi_plus: fn(f64) -> f64,
    /// `φ₊'`, used by the primal Moreau-Yosida solvers.
    pub phi_plus_d1: fn(f64) -> f64,
    /// `φ₊''`.
    pub phi_plus_d2: fn(f64) -> f64,
    /// `φ₊*`.
    pub phi_plus_conj: fn(f64) -> f64,
    /// `(φ₊*)'`.
    pub phi_plus_conj_d1: fn(f64) -> f64,
    /// `(φ₊*)''`.
    pub phi_plus_conj_d2: fn(f64) -> f64,
    /// `φ'(∞) = lim φ(x)/x`.
    pub phi_prime_inf: f64,
    /// `(f, ν) ↦ γ` where the optimal shift has a closed form.
    pub closed_form_gamma: Option<fn(&[f64], &[f64]) -> f64>,
    /// Pointwise term `t(u)` with `D = Σ t(μᵢ/νᵢ) νᵢ + φ'(∞)·(singular mass)`
    /// for probability pairs.
    pub closed_form_divergence: Option<fn(f64) -> f64>,
    /// Csiszár-potential map `u ↦ φ₊'(u)` (Legendre-type generators).
    pub potential_from_ratio: Option<fn(f64) -> f64>,
    /// False where `(φ₊*)''` vanishes almost everywhere.
    pub newton_applicable: bool,
}

impl fmt::Debug for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorSpec")
            .field("generator", &self.generator)
            .field("phi_prime_inf", &self.phi_prime_inf)
            .field("newton_applicable", &self.newton_applicable)
            .finish_non_exhaustive()
    }
}

impl GeneratorSpec {
    pub fn name(&self) -> &'static str {
        self.generator.name()
    }

    pub fn is_trivial(&self) -> bool {
        self.generator == Generator::Trivial
    }

    pub fn is_legendre(&self) -> bool {
        self.potential_from_ratio.is_some()
    }

    /// Subdifferential of `φ₊*` at `y` as a closed interval `[lo, hi]`.
    ///
    /// Empty (returned as `(∞, ∞)`) outside the domain.
    pub fn conj_subdifferential(&self, y: f64) -> (f64, f64) {
        match self.generator {
            Generator::TotalVariation => total_variation::subdifferential(y),
            _ => {
                let d = (self.phi_plus_conj_d1)(y);
                (d, d)
            }
        }
    }
}

/// Looks a generator up by its string identifier.
pub fn get_spec(name: &str) -> Result<GeneratorSpec> {
    Ok(name.parse::<Generator>()?.spec())
}

/// A set of generator tables, addressable by name.
///
/// The standard catalog is what [`get_spec`] returns; a modified catalog can
/// be handed to the self-test to check that corrupted tables are detected.
#[derive(Debug, Clone)]
pub struct Catalog {
    specs: Vec<GeneratorSpec>,
}

impl Default for Catalog {
    fn default() -> Self {
        Self::standard()
    }
}

impl Catalog {
    pub fn standard() -> Self {
        Self {
            specs: Generator::ALL.iter().map(|g| g.spec()).collect(),
        }
    }

    pub fn get(&self, generator: Generator) -> GeneratorSpec {
        *self
            .specs
            .iter()
            .find(|s| s.generator == generator)
            .expect("catalog holds every generator")
    }

    pub fn by_name(&self, name: &str) -> Result<GeneratorSpec> {
        Ok(self.get(name.parse()?))
    }

    pub fn replace(&mut self, spec: GeneratorSpec) {
        for s in &mut self.specs {
            if s.generator == spec.generator {
                *s = spec;
            }
        }
    }

    /// Overwrites the conjugate of `generator` with its own first
    /// derivative. Used to inject a table fault.
    pub fn perturb(&mut self, generator: Generator) {
        let mut spec = self.get(generator);
        spec.phi_plus_conj = spec.phi_plus_conj_d1;
        self.replace(spec);
    }
}

fn zero(_: f64) -> f64 {
    0.0
}

fn max_entry(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

mod kl {
    use super::*;

    pub fn phi_plus(x: f64) -> f64 {
        if x > 0.0 {
            x * x.ln() - x + 1.0
        } else if x == 0.0 {
            1.0
        } else {
            INF
        }
    }

    pub fn phi_plus_d1(x: f64) -> f64 {
        x.ln()
    }

    pub fn phi_plus_d2(x: f64) -> f64 {
        1.0 / x
    }

    pub fn conj(x: f64) -> f64 {
        x.exp_m1()
    }

    pub fn conj_d1(x: f64) -> f64 {
        x.exp()
    }

    /// `log⟨ν, e^f⟩`, shifted by the maximum over the support of `ν`.
    pub fn gamma(f: &[f64], nu: &[f64]) -> f64 {
        let m = f
            .iter()
            .zip(nu)
            .filter(|(_, &n)| n > 0.0)
            .map(|(&v, _)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = f
            .iter()
            .zip(nu)
            .filter(|(_, &n)| n > 0.0)
            .map(|(&v, &n)| n * (v - m).exp())
            .sum();
        m + s.ln()
    }

    pub fn term(u: f64) -> f64 {
        if u == 0.0 {
            0.0
        } else {
            u * u.ln()
        }
    }
}

mod reverse_kl {
    use super::*;

    pub fn phi_plus(x: f64) -> f64 {
        if x > 0.0 {
            x - 1.0 - x.ln()
        } else {
            INF
        }
    }

    pub fn phi_plus_d1(x: f64) -> f64 {
        (x - 1.0) / x
    }

    pub fn phi_plus_d2(x: f64) -> f64 {
        1.0 / (x * x)
    }

    pub fn conj(x: f64) -> f64 {
        if x < 1.0 {
            -(-x).ln_1p()
        } else {
            INF
        }
    }

    pub fn conj_d1(x: f64) -> f64 {
        if x < 1.0 {
            1.0 / (1.0 - x)
        } else {
            INF
        }
    }

    pub fn conj_d2(x: f64) -> f64 {
        if x < 1.0 {
            1.0 / ((1.0 - x) * (1.0 - x))
        } else {
            INF
        }
    }

    pub fn term(u: f64) -> f64 {
        -u.ln()
    }
}

mod chi2 {
    use super::*;

    pub fn phi_plus(x: f64) -> f64 {
        if x >= 0.0 {
            (x - 1.0) * (x - 1.0)
        } else {
            INF
        }
    }

    pub fn phi_plus_d1(x: f64) -> f64 {
        2.0 * x - 2.0
    }

    pub fn phi_plus_d2(_: f64) -> f64 {
        2.0
    }

    pub fn conj(x: f64) -> f64 {
        if x >= -2.0 {
            0.25 * x * x + x
        } else {
            -1.0
        }
    }

    pub fn conj_d1(x: f64) -> f64 {
        if x >= -2.0 {
            0.5 * x + 1.0
        } else {
            0.0
        }
    }

    pub fn conj_d2(x: f64) -> f64 {
        if x >= -2.0 {
            0.5
        } else {
            0.0
        }
    }

    pub fn term(u: f64) -> f64 {
        u * u - 1.0
    }
}

mod reverse_chi2 {
    use super::*;

    pub fn phi_plus(x: f64) -> f64 {
        if x > 0.0 {
            1.0 / x + x - 2.0
        } else {
            INF
        }
    }

    pub fn phi_plus_d1(x: f64) -> f64 {
        1.0 - 1.0 / (x * x)
    }

    pub fn phi_plus_d2(x: f64) -> f64 {
        2.0 / (x * x * x)
    }

    pub fn conj(x: f64) -> f64 {
        if x <= 1.0 {
            2.0 - 2.0 * (1.0 - x).sqrt()
        } else {
            INF
        }
    }

    pub fn conj_d1(x: f64) -> f64 {
        if x < 1.0 {
            1.0 / (1.0 - x).sqrt()
        } else {
            INF
        }
    }

    pub fn conj_d2(x: f64) -> f64 {
        if x < 1.0 {
            let s = (1.0 - x).sqrt();
            1.0 / (2.0 * s * s * s)
        } else {
            INF
        }
    }

    pub fn term(u: f64) -> f64 {
        1.0 / u - 1.0
    }
}

mod hellinger {
    use super::*;

    pub fn phi_plus(x: f64) -> f64 {
        if x >= 0.0 {
            let r = x.sqrt() - 1.0;
            r * r
        } else {
            INF
        }
    }

    pub fn phi_plus_d1(x: f64) -> f64 {
        1.0 - 1.0 / x.sqrt()
    }

    pub fn phi_plus_d2(x: f64) -> f64 {
        0.5 / (x * x.sqrt())
    }

    pub fn conj(x: f64) -> f64 {
        if x < 1.0 {
            x / (1.0 - x)
        } else {
            INF
        }
    }

    pub fn conj_d1(x: f64) -> f64 {
        if x < 1.0 {
            1.0 / ((1.0 - x) * (1.0 - x))
        } else {
            INF
        }
    }

    pub fn conj_d2(x: f64) -> f64 {
        if x < 1.0 {
            2.0 / ((1.0 - x) * (1.0 - x) * (1.0 - x))
        } else {
            INF
        }
    }

    pub fn term(u: f64) -> f64 {
        2.0 * (1.0 - u.sqrt())
    }
}

mod jensen_shannon {
    use super::*;

    pub fn phi_plus(x: f64) -> f64 {
        if x > 0.0 {
            x * x.ln() - (x + 1.0) * ((x + 1.0) / 2.0).ln()
        } else if x == 0.0 {
            LN_2
        } else {
            INF
        }
    }

    pub fn phi_plus_d1(x: f64) -> f64 {
        x.ln() - x.ln_1p() + LN_2
    }

    pub fn phi_plus_d2(x: f64) -> f64 {
        1.0 / (x * (x + 1.0))
    }

    pub fn conj(x: f64) -> f64 {
        let v = 2.0 - x.exp();
        if x <= LN_2 && v > 0.0 {
            -v.ln()
        } else {
            INF
        }
    }

    pub fn conj_d1(x: f64) -> f64 {
        let v = 2.0 * (-x).exp() - 1.0;
        if x < LN_2 && v > 0.0 {
            1.0 / v
        } else {
            INF
        }
    }

    pub fn conj_d2(x: f64) -> f64 {
        let ex = x.exp();
        if x < LN_2 && ex < 2.0 {
            2.0 * ex / ((ex - 2.0) * (ex - 2.0))
        } else {
            INF
        }
    }

    pub fn term(u: f64) -> f64 {
        let a = if u == 0.0 {
            0.0
        } else {
            u * (2.0 * u / (u + 1.0)).ln()
        };
        a + (2.0 / (u + 1.0)).ln()
    }
}

mod jeffreys {
    use super::*;

    pub fn phi_plus(x: f64) -> f64 {
        if x > 0.0 {
            (x - 1.0) * x.ln()
        } else {
            INF
        }
    }

    pub fn phi_plus_d1(x: f64) -> f64 {
        x.ln() - 1.0 / x + 1.0
    }

    pub fn phi_plus_d2(x: f64) -> f64 {
        1.0 / x + 1.0 / (x * x)
    }

    /// `x + w + 1/w − 2` with `w = W(e^{1−x})`; since `w + ln w = 1 − x`
    /// this is `1/w − ln w − 1`, which avoids cancellation for `x ≪ 0`.
    pub fn conj(x: f64) -> f64 {
        let w = lambert_w_exp(1.0 - x);
        1.0 / w - w.ln() - 1.0
    }

    pub fn conj_d1(x: f64) -> f64 {
        1.0 / lambert_w_exp(1.0 - x)
    }

    pub fn conj_d2(x: f64) -> f64 {
        let w = lambert_w_exp(1.0 - x);
        1.0 / (w * (w + 1.0))
    }

    pub fn term(u: f64) -> f64 {
        u * u.ln() - u.ln()
    }
}

mod triangular {
    use super::*;

    pub fn phi_plus(x: f64) -> f64 {
        if x >= 0.0 {
            (x - 1.0) * (x - 1.0) / (x + 1.0)
        } else {
            INF
        }
    }

    pub fn phi_plus_d1(x: f64) -> f64 {
        (x - 1.0) * (x + 3.0) / ((x + 1.0) * (x + 1.0))
    }

    pub fn phi_plus_d2(x: f64) -> f64 {
        8.0 / ((x + 1.0) * (x + 1.0) * (x + 1.0))
    }

    pub fn conj(x: f64) -> f64 {
        if x < -3.0 {
            -1.0
        } else if x <= 1.0 {
            let s = (1.0 - x).sqrt();
            (s - 1.0) * (s - 3.0)
        } else {
            INF
        }
    }

    pub fn conj_d1(x: f64) -> f64 {
        if x < -3.0 {
            0.0
        } else if x < 1.0 {
            2.0 / (1.0 - x).sqrt() - 1.0
        } else {
            INF
        }
    }

    pub fn conj_d2(x: f64) -> f64 {
        if x < -3.0 {
            0.0
        } else if x < 1.0 {
            let s = (1.0 - x).sqrt();
            1.0 / (s * s * s)
        } else {
            INF
        }
    }

    pub fn term(u: f64) -> f64 {
        (u + 1.0) - 4.0 * u / (u + 1.0)
    }
}

mod total_variation {
    use super::*;

    pub fn phi_plus(x: f64) -> f64 {
        if x >= 0.0 {
            (x - 1.0).abs()
        } else {
            INF
        }
    }

    pub fn phi_plus_d1(x: f64) -> f64 {
        if x > 1.0 {
            1.0
        } else if x < 1.0 {
            -1.0
        } else {
            0.0
        }
    }

    pub fn conj(x: f64) -> f64 {
        if x < -1.0 {
            -1.0
        } else if x <= 1.0 {
            x
        } else {
            INF
        }
    }

    pub fn conj_d1(x: f64) -> f64 {
        if x < -1.0 {
            0.0
        } else if x <= 1.0 {
            1.0
        } else {
            INF
        }
    }

    pub fn conj_d2(x: f64) -> f64 {
        if x <= 1.0 {
            0.0
        } else {
            INF
        }
    }

    pub fn subdifferential(x: f64) -> (f64, f64) {
        if x < -1.0 {
            (0.0, 0.0)
        } else if x == -1.0 {
            (0.0, 1.0)
        } else if x < 1.0 {
            (1.0, 1.0)
        } else if x == 1.0 {
            (1.0, INF)
        } else {
            (INF, INF)
        }
    }

    pub fn gamma(f: &[f64], _nu: &[f64]) -> f64 {
        max_entry(f) - 1.0
    }

    pub fn term(u: f64) -> f64 {
        (u - 1.0).abs()
    }
}

mod trivial {
    use super::*;

    pub fn phi_plus(x: f64) -> f64 {
        if x == 1.0 {
            0.0
        } else {
            INF
        }
    }

    pub fn conj(x: f64) -> f64 {
        x
    }

    pub fn conj_d1(_: f64) -> f64 {
        1.0
    }
}
