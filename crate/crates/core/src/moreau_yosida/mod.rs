//! Moreau-Yosida approximation of an f-divergence with respect to `W₁`,
//!
//! ```text
//! D_{φ,λ,α}(μ‖ν) = min_ξ { D_φ(ξ‖ν) + λ W₁(μ,ξ)^α }
//!                = max_f { ⟨μ,f⟩ − D_φ*(f‖ν) − P_{λ,α}(‖f‖_L) },
//! ```
//!
//! computed along both routes so each can certify the other. For `α = ∞` the
//! penalty becomes the ball constraint `W₁(μ,ξ) ≤ β` on the primal side and
//! `β‖f‖_L` on the dual side.
//!
//! Default solvers are primal-dual barrier methods: the primal lifts `ξ` to a
//! transport plan out of `μ`, which makes the objective smooth; the dual
//! replaces `‖f‖_L` by an epigraph variable `s` with the pairwise constraints
//! `fᵢ − fⱼ ≤ s dᵢⱼ`. The projected-subgradient primal and the gradient-ascent
//! dual with Pasch–Hausdorff restoration are available as alternatives.

mod dual;
mod primal;
mod tv;

use serde::{Deserialize, Serialize};

use crate::catalog::{Generator, GeneratorSpec};
use crate::conjugate::{check_csiszar_potential, CsiszarReport, SolverConfig};
use crate::error::{ensure_same_len, ensure_simplex, Error, Result};
use crate::measures::{DiscreteMeasure, FiniteMetricSpace, PROBABILITY_TOL};
use crate::transport::{lipschitz_norm, w1_distance};

pub use dual::my_dual;
pub use primal::my_primal;

/// Exponent of the transport penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alpha {
    Finite(f64),
    Infinite,
}

impl Alpha {
    pub fn finite(self) -> Option<f64> {
        match self {
            Alpha::Finite(a) => Some(a),
            Alpha::Infinite => None,
        }
    }
}

impl std::fmt::Display for Alpha {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Alpha::Finite(a) => write!(f, "{a}"),
            Alpha::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Alpha::Infinite),
            other => other
                .parse::<f64>()
                .map(|a| if a.is_infinite() { Alpha::Infinite } else { Alpha::Finite(a) })
                .map_err(|_| Error::InvalidInput(format!("invalid alpha `{s}`"))),
        }
    }
}

/// `λ`, `α` and the optional radius `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MYParams {
    pub lambda: f64,
    pub alpha: Alpha,
    pub beta: Option<f64>,
}

impl MYParams {
    /// Penalty `λ W₁^α` with finite `α`.
    pub fn new(lambda: f64, alpha: f64) -> Result<Self> {
        let p = Self {
            lambda,
            alpha: Alpha::Finite(alpha),
            beta: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Ball constraint `W₁(μ, ξ) ≤ β`.
    pub fn ball(beta: f64) -> Result<Self> {
        let p = Self {
            lambda: f64::NAN,
            alpha: Alpha::Infinite,
            beta: Some(beta),
        };
        p.validate()?;
        Ok(p)
    }

    /// `λ = (1/α) β^{−α}` for finite `α`, the ball form for `α = ∞`.
    pub fn from_beta(alpha: Alpha, beta: f64) -> Result<Self> {
        match alpha {
            Alpha::Infinite => Self::ball(beta),
            Alpha::Finite(a) => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::InvalidInput(format!("beta must be > 0, got {beta}")));
                }
                let p = Self {
                    lambda: beta.powf(-a) / a,
                    alpha,
                    beta: Some(beta),
                };
                p.validate()?;
                Ok(p)
            }
        }
    }

    /// Builds parameters from optional command-line style inputs.
    pub fn from_parts(lambda: Option<f64>, alpha: Alpha, beta: Option<f64>) -> Result<Self> {
        match (alpha, lambda, beta) {
            (Alpha::Infinite, Some(_), _) => Err(Error::InvalidInput(
                "alpha = inf takes the radius beta, not lambda".into(),
            )),
            (Alpha::Infinite, None, Some(b)) => Self::ball(b),
            (Alpha::Infinite, None, None) => {
                Err(Error::InvalidInput("alpha = inf requires beta".into()))
            }
            (Alpha::Finite(a), Some(l), None) => Self::new(l, a),
            (Alpha::Finite(_), None, Some(b)) => Self::from_beta(alpha, b),
            (Alpha::Finite(_), Some(_), Some(_)) => Err(Error::InvalidInput(
                "give either lambda or beta, not both".into(),
            )),
            (Alpha::Finite(_), None, None) => {
                Err(Error::InvalidInput("lambda or beta is required".into()))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.alpha {
            Alpha::Infinite => match self.beta {
                Some(b) if b > 0.0 && b.is_finite() => Ok(()),
                _ => Err(Error::InvalidInput("alpha = inf requires beta > 0".into())),
            },
            Alpha::Finite(a) => {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::InvalidInput(format!("alpha must be > 0, got {a}")));
                }
                if !(self.lambda > 0.0 && self.lambda.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "lambda must be finite and > 0, got {}",
                        self.lambda
                    )));
                }
                Ok(())
            }
        }
    }

    /// `λ W^α`, or the ball indicator for `α = ∞`.
    pub fn transport_cost(&self, w: f64) -> f64 {
        match self.alpha {
            Alpha::Finite(a) => self.lambda * w.powf(a),
            Alpha::Infinite => {
                if w <= self.beta.unwrap_or(0.0) * (1.0 + INDICATOR_SLACK) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Dual penalty of the Lipschitz norm `l`.
    pub fn penalty(&self, l: f64) -> f64 {
        match self.alpha {
            Alpha::Infinite => penalty(self.beta.unwrap_or(f64::NAN), self.alpha, l),
            Alpha::Finite(_) => penalty(self.lambda, self.alpha, l),
        }
    }
}

/// Relative slack allowed in the `α = 1` indicator and the `α = ∞` ball.
const INDICATOR_SLACK: f64 = 1e-9;

/// Dual penalty on the Lipschitz norm `l ≥ 0`:
///
/// - `α > 1`: `(α−1) α^{α/(1−α)} λ^{1/(1−α)} l^{α/(α−1)}`,
/// - `α = 1`: `0` if `l ≤ λ`, else `+∞`,
/// - `α = ∞`: `β l`, with the radius `β` passed in place of `λ`.
pub fn penalty(lambda: f64, alpha: Alpha, l: f64) -> f64 {
    match alpha {
        Alpha::Infinite => lambda * l,
        Alpha::Finite(1.0) => {
            if l <= lambda * (1.0 + INDICATOR_SLACK) {
                0.0
            } else {
                f64::INFINITY
            }
        }
        Alpha::Finite(a) => {
            if l == 0.0 {
                return 0.0;
            }
            (a - 1.0) * a.powf(a / (1.0 - a)) * lambda.powf(1.0 / (1.0 - a)) * l.powf(a / (a - 1.0))
        }
    }
}

/// Solver choice for [`my_primal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimalMethod {
    /// Log-barrier Newton on the lifted transport plan.
    Barrier,
    /// Projected subgradient on the simplex with step `c/√t`.
    Subgradient,
}

/// Solver choice for [`my_dual`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualMethod {
    /// Log-barrier Newton on `(f, s)` with `fᵢ − fⱼ ≤ s dᵢⱼ`.
    Barrier,
    /// Fixed-step gradient ascent; for `α = 1` each step is followed by the
    /// Pasch–Hausdorff envelope.
    Ascent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MYConfig {
    pub primal: PrimalMethod,
    pub dual: DualMethod,
    /// Target duality gap of the barrier path.
    pub tol: f64,
    /// Newton steps allowed per barrier stage.
    pub max_newton: usize,
    /// `c` in the subgradient step `c/√t`.
    pub step_size: f64,
    pub subgradient_iters: usize,
    pub learning_rate: f64,
    pub ascent_iters: usize,
    pub conjugate: SolverConfig,
}

impl Default for MYConfig {
    fn default() -> Self {
        Self {
            primal: PrimalMethod::Barrier,
            dual: DualMethod::Barrier,
            tol: 1e-10,
            max_newton: 200,
            step_size: 0.1,
            subgradient_iters: 5_000,
            learning_rate: 0.05,
            ascent_iters: 20_000,
            conjugate: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MYResult {
    pub value: f64,
    /// Primal minimizer (primal route only).
    pub xi_star: Option<Vec<f64>>,
    /// Dual maximizer, normalized to `f(x₀) = 0` (dual route only).
    pub f_star: Option<Vec<f64>>,
    pub converged: bool,
    pub iterations: usize,
    /// Bound on the suboptimality of `value`, as reported by the solver.
    pub gap_estimate: f64,
    pub method: String,
    /// Set for `0 < α < 1`, where the primal is not convex.
    pub experimental: bool,
}

impl MYResult {
    fn exact(value: f64, xi: Option<Vec<f64>>, f: Option<Vec<f64>>, method: &str) -> Self {
        Self {
            value,
            xi_star: xi,
            f_star: f,
            converged: true,
            iterations: 0,
            gap_estimate: 0.0,
            method: method.to_string(),
            experimental: false,
        }
    }
}

/// Validated inputs shared by both routes.
struct Problem<'a> {
    spec: &'a GeneratorSpec,
    space: &'a FiniteMetricSpace,
    mu: &'a [f64],
    nu: &'a [f64],
    params: MYParams,
}

impl<'a> Problem<'a> {
    fn new(
        spec: &'a GeneratorSpec,
        space: &'a FiniteMetricSpace,
        mu: &'a DiscreteMeasure,
        nu: &'a DiscreteMeasure,
        params: &MYParams,
    ) -> Result<Self> {
        params.validate()?;
        let (mu, nu) = (mu.weights(), nu.weights());
        ensure_same_len(mu, nu)?;
        if mu.len() != space.len() {
            return Err(Error::LengthMismatch(space.len(), mu.len()));
        }
        ensure_simplex(mu, PROBABILITY_TOL)?;
        ensure_simplex(nu, PROBABILITY_TOL)?;
        Ok(Self {
            spec,
            space,
            mu,
            nu,
            params: *params,
        })
    }

    fn n(&self) -> usize {
        self.mu.len()
    }

    fn same_measures(&self) -> bool {
        self.mu == self.nu
    }

    /// Columns a plan out of `μ` may use: `supp(ν)`, plus everything when
    /// singular mass has a finite price.
    fn allowed_columns(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&j| self.nu[j] > 0.0 || self.spec.phi_prime_inf.is_finite())
            .collect()
    }

    /// `min W₁(μ, ξ)` over `ξ` with `D_φ(ξ‖ν) < ∞`, and the nearest-column
    /// assignment attaining it.
    fn closest_reachable(&self) -> (f64, Vec<f64>) {
        let cols = self.allowed_columns();
        let mut xi = vec![0.0; self.n()];
        let mut cost = 0.0;
        for (i, &m) in self.mu.iter().enumerate() {
            if m > 0.0 {
                let (mut best, mut arg) = (f64::INFINITY, cols[0]);
                for &j in &cols {
                    if self.space.d(i, j) < best {
                        best = self.space.d(i, j);
                        arg = j;
                    }
                }
                cost += m * best;
                xi[arg] += m;
            }
        }
        (cost, xi)
    }

    /// Exact primal objective at `ξ`.
    fn primal_objective(&self, xi: &[f64]) -> Result<f64> {
        let d = crate::measures::divergence(self.spec, xi, self.nu);
        if !d.is_finite() {
            return Ok(f64::INFINITY);
        }
        let w = w1_distance(self.space, self.mu, xi)?;
        Ok(d + self.params.transport_cost(w))
    }

    /// Exact dual objective at `f`.
    fn dual_objective(&self, f: &[f64], cfg: &SolverConfig) -> Result<f64> {
        let pen = self.params.penalty(lipschitz_norm(self.space, f));
        if !pen.is_finite() {
            return Ok(f64::NEG_INFINITY);
        }
        let conj = crate::conjugate::conjugate_unchecked(self.spec, f, self.nu, cfg)?;
        let lin: f64 = self.mu.iter().zip(f).map(|(a, b)| a * b).sum();
        Ok(lin - conj.value - pen)
    }
}

/// Normalizes `ξ` by zeroing entries at or below `floor` and rescaling.
fn clean_measure(xi: &[f64], floor: f64) -> Vec<f64> {
    let mut out: Vec<f64> = xi.iter().map(|&x| if x > floor { x } else { 0.0 }).collect();
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= s);
    out
}

/// Outcome of [`check_optimality_structure`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub w1_mu_xi: f64,
    pub lipschitz_norm: f64,
    /// `αλ W₁(μ,ξ*)^{α−1}` for `α > 1`.
    pub expected_norm: Option<f64>,
    pub norm_error: f64,
    pub csiszar: CsiszarReport,
    /// `|⟨μ − ξ*, f*⟩ − ‖f*‖_L W₁(μ,ξ*)|`.
    pub kantorovich_error: f64,
    pub norm_ok: bool,
    pub kantorovich_ok: bool,
    pub pass: bool,
}

/// Mass below which a primal atom is treated as zero by the structure check.
const ATOM_FLOOR: f64 = 1e-9;

/// Checks that the dual maximizer is simultaneously a Csiszár potential of
/// `(ξ*, ν)` and a scaled Kantorovich potential of `(μ, ξ*)`.
///
/// Errors are relative to `max(1, |reference|)`. Minimizers need not be
/// unique, so a failure on such instances is a report, not a defect.
pub fn check_optimality_structure(
    spec: &GeneratorSpec,
    space: &FiniteMetricSpace,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    params: &MYParams,
    primal: &MYResult,
    dual: &MYResult,
    tol: f64,
) -> Result<StructureReport> {
    let problem = Problem::new(spec, space, mu, nu, params)?;
    let xi = primal
        .xi_star
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("primal result carries no minimizer".into()))?;
    let f = dual
        .f_star
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("dual result carries no potential".into()))?;
    ensure_same_len(xi, problem.mu)?;
    ensure_same_len(f, problem.mu)?;
    let xi = clean_measure(xi, ATOM_FLOOR);

    let w = w1_distance(space, problem.mu, &xi)?;
    let l = lipschitz_norm(space, f);
    let expected_norm = match params.alpha {
        Alpha::Finite(a) if a > 1.0 => Some(a * params.lambda * w.powf(a - 1.0)),
        _ => None,
    };
    let norm_error = expected_norm.map_or(0.0, |e| (l - e).abs() / e.abs().max(1.0));
    let csiszar = check_csiszar_potential(spec, &xi, problem.nu, f, tol)?;
    let pairing: f64 = problem
        .mu
        .iter()
        .zip(&xi)
        .zip(f)
        .map(|((m, x), v)| (m - x) * v)
        .sum();
    let reference = l * w;
    let kantorovich_error = (pairing - reference).abs() / reference.abs().max(1.0);
    let norm_ok = norm_error <= tol;
    let kantorovich_ok = kantorovich_error <= tol;
    Ok(StructureReport {
        w1_mu_xi: w,
        lipschitz_norm: l,
        expected_norm,
        norm_error,
        pass: norm_ok && kantorovich_ok && csiszar.ok,
        csiszar,
        kantorovich_error,
        norm_ok,
        kantorovich_ok,
    })
}

/// True for the generator whose divergence is a `W₁` distance itself, which
/// both routes handle by a one-dimensional search over transport problems.
fn is_total_variation(spec: &GeneratorSpec) -> bool {
    spec.generator == Generator::TotalVariation
}
