//! The tight conjugate of an f-divergence on a finite space.
//!
//! For a probability vector `ν` and a potential `f`,
//!
//! ```text
//! D_φ*(f‖ν) = min_{γ ≥ max f − φ'(∞)} ⟨ν, φ₊*(f − γ)⟩ + γ
//! ```
//!
//! The minimizing shift `γ` solves `⟨ν, (φ₊*)'(f − γ)⟩ = 1`. It is found by
//! Newton's method started at `max f − φ'(∞) + ε` (finite recession slope) or
//! at `⟨ν, f⟩`, with a bisection safeguard on the monotone map
//! `γ ↦ ⟨ν, (φ₊*)'(f − γ)⟩` for generators whose `(φ₊*)''` has flat regions.
//! Its gradient follows from the implicit function theorem:
//!
//! ```text
//! ∇_f γ = ν ⊙ (φ₊*)''(f − γ) / ⟨ν, (φ₊*)''(f − γ)⟩
//! ```
//!
//! All evaluations shift `f` by its maximum first (`D*(f) = D*(f − max f) + max f`),
//! the generalized log-sum-exp trick.
//!
//! Entries of `ν` equal to zero are dropped from the Newton sums, but the
//! feasibility bound uses the maximum over every entry of `f`. When that
//! bound is active the optimal `μ*` carries singular mass at the maximizing
//! point outside the support of `ν`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::catalog::{Generator, GeneratorSpec};
use crate::error::{ensure_finite, ensure_same_len, ensure_simplex, Error, Result, SolveDiagnostics};

/// Tolerance on `Σν = 1` for inputs to the conjugate.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Required bound on the first-order residual `|⟨ν,(φ₊*)'(f−γ)⟩ − 1|`.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Newton steps shorter than this fraction of the bracket count as creeping.
const CREEP_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Newton step threshold `τ`.
    pub tol: f64,
    pub max_iter: usize,
    /// Initialization offset `ε` used when `φ'(∞) < ∞`; `None` selects
    /// `1e-3·(1 + |max f − ⟨ν,f⟩|)`.
    pub epsilon: Option<f64>,
    /// Use closed forms (kl, total_variation) when available.
    pub use_closed_form: bool,
    /// Shift `f` by its maximum before solving.
    pub stabilize: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            epsilon: None,
            use_closed_form: true,
            stabilize: true,
        }
    }
}

impl SolverConfig {
    /// Forces the Newton path even where a closed form exists.
    pub fn newton() -> Self {
        Self {
            use_closed_form: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tol must be > 0, got {}", self.tol)));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return Err(Error::InvalidInput(format!("epsilon must be > 0, got {eps}")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    ClosedForm,
    Newton,
    Trivial,
}

impl SolveMethod {
    pub fn tag(self) -> &'static str {
        match self {
            SolveMethod::ClosedForm => "closed-form",
            SolveMethod::Newton => "newton",
            SolveMethod::Trivial => "trivial",
        }
    }
}

/// The optimal shift `γ_{φ,ν}(f)` with its gradient and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSolution {
    pub gamma: f64,
    /// `∇_f γ`, a probability vector over all points.
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub bisection_steps: usize,
    pub converged: bool,
    /// `|⟨ν,(φ₊*)'(f−γ)⟩ − 1|` at exit (zero when the feasibility bound is active).
    pub residual: f64,
    pub method: SolveMethod,
    /// The bound `γ ≥ max f − φ'(∞)` is active.
    pub at_bound: bool,
    /// Index where singular mass sits when `at_bound`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_index: Option<usize>,
}

/// Value, shift and gradient of `D_φ*(f‖ν)` from a single solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conjugate {
    pub value: f64,
    pub gamma: GammaSolution,
    /// `∂D_φ*(f‖ν)`, the optimal `μ*`.
    pub gradient: Vec<f64>,
}

fn validate(f: &[f64], nu: &[f64], cfg: &SolverConfig) -> Result<()> {
    ensure_same_len(f, nu)?;
    ensure_finite(f)?;
    ensure_simplex(nu, SIMPLEX_TOL)?;
    cfg.validate()
}

fn max_entry(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn first_argmax(x: &[f64]) -> usize {
    let m = max_entry(x);
    x.iter().position(|&v| v == m).unwrap_or(0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Σ_{νᵢ>0} νᵢ g(fᵢ − γ)`.
fn nu_sum(nu: &[f64], f: &[f64], gamma: f64, g: fn(f64) -> f64) -> f64 {
    f.iter()
        .zip(nu)
        .filter(|(_, &n)| n > 0.0)
        .map(|(&v, &n)| n * g(v - gamma))
        .sum()
}

/// Solves for `γ_{φ,ν}(f)` and `∇_f γ`.
pub fn solve_gamma(
    spec: &GeneratorSpec,
    f: &[f64],
    nu: &[f64],
    cfg: &SolverConfig,
) -> Result<GammaSolution> {
    validate(f, nu, cfg)?;
    solve_gamma_unchecked(spec, f, nu, cfg)
}

fn solve_gamma_unchecked(
    spec: &GeneratorSpec,
    f: &[f64],
    nu: &[f64],
    cfg: &SolverConfig,
) -> Result<GammaSolution> {
    if spec.is_trivial() {
        return Ok(GammaSolution {
            gamma: dot(nu, f),
            grad: nu.to_vec(),
            iterations: 0,
            bisection_steps: 0,
            converged: true,
            residual: 0.0,
            method: SolveMethod::Trivial,
            at_bound: false,
            bound_index: None,
        });
    }
    if let Some(closed) = spec.closed_form_gamma {
        if cfg.use_closed_form || !spec.newton_applicable {
            return Ok(closed_form_solution(spec, closed, f, nu));
        }
    }
    if !spec.newton_applicable {
        return Err(Error::Unsupported(format!(
            "{} has no usable second derivative and no closed form",
            spec.name()
        )));
    }
    if cfg.stabilize {
        let m = max_entry(f);
        let shifted: Vec<f64> = f.iter().map(|v| v - m).collect();
        let mut sol = newton_gamma(spec, &shifted, nu, cfg)?;
        sol.gamma += m;
        Ok(sol)
    } else {
        newton_gamma(spec, f, nu, cfg)
    }
}

fn closed_form_solution(
    spec: &GeneratorSpec,
    closed: fn(&[f64], &[f64]) -> f64,
    f: &[f64],
    nu: &[f64],
) -> GammaSolution {
    let gamma = closed(f, nu);
    let n = f.len();
    let (grad, at_bound, bound_index) = match spec.generator {
        Generator::TotalVariation => {
            let k = first_argmax(f);
            let mut g = vec![0.0; n];
            g[k] = 1.0;
            (g, true, Some(k))
        }
        _ => {
            // softmax-like: ν ⊙ (φ₊*)''(f − γ), normalized
            let mut g: Vec<f64> = f
                .iter()
                .zip(nu)
                .map(|(&v, &w)| if w > 0.0 { w * (spec.phi_plus_conj_d2)(v - gamma) } else { 0.0 })
                .collect();
            let s: f64 = g.iter().sum();
            g.iter_mut().for_each(|x| *x /= s);
            (g, false, None)
        }
    };
    let residual = if at_bound {
        0.0
    } else {
        (nu_sum(nu, f, gamma, spec.phi_plus_conj_d1) - 1.0).abs()
    };
    GammaSolution {
        gamma,
        grad,
        iterations: 0,
        bisection_steps: 0,
        converged: true,
        residual,
        method: SolveMethod::ClosedForm,
        at_bound,
        bound_index,
    }
}

/// Newton iteration for `γ` on the given (unshifted) `f`.
///
/// Newton candidates outside the current bracket, outside the feasible
/// half-line, or that increase `|h|` are replaced by bisection (or by
/// bracket expansion while one side is still unknown).
pub fn newton_gamma(
    spec: &GeneratorSpec,
    f: &[f64],
    nu: &[f64],
    cfg: &SolverConfig,
) -> Result<GammaSolution> {
    let n = f.len();
    let d1 = spec.phi_plus_conj_d1;
    let d2 = spec.phi_plus_conj_d2;
    let h = |g: f64| nu_sum(nu, f, g, d1) - 1.0;
    let hp = |g: f64| nu_sum(nu, f, g, d2);

    let fmax = max_entry(f);
    let lower = fmax - spec.phi_prime_inf;

    if lower.is_finite() {
        let h_lower = h(lower);
        if h_lower <= 0.0 {
            // Maximizer lies outside supp(ν): the bound is active.
            let k = f
                .iter()
                .zip(nu)
                .position(|(&v, &w)| v == fmax && w == 0.0)
                .unwrap_or_else(|| first_argmax(f));
            let mut grad = vec![0.0; n];
            grad[k] = 1.0;
            return Ok(GammaSolution {
                gamma: lower,
                grad,
                iterations: 0,
                bisection_steps: 0,
                converged: true,
                residual: 0.0,
                method: SolveMethod::Newton,
                at_bound: true,
                bound_index: Some(k),
            });
        }
    }

    let gamma = if lower.is_finite() {
        let eps = cfg
            .epsilon
            .unwrap_or_else(|| 1e-3 * (1.0 + (fmax - dot(nu, f)).abs()));
        lower + eps
    } else {
        dot(nu, f)
    };

    // h is nonincreasing and (φ₊*)'(φ₊'(1)) = 1, so the root lies in
    // [min f − φ₊'(1), max f − φ₊'(1)] over supp(ν).
    let y_one = (spec.phi_plus_d1)(1.0);
    let (smin, smax) = f
        .iter()
        .zip(nu)
        .filter(|(_, &w)| w > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (&v, _)| (a.min(v), b.max(v)));
    // No single term of the sum can exceed 1: γ ≥ fᵢ − φ₊'(1/νᵢ).
    let single = f
        .iter()
        .zip(nu)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&v, &w)| v - (spec.phi_plus_d1)(1.0 / w))
        .fold(f64::NEG_INFINITY, f64::max);
    let floor = (smin - y_one).max(single);
    let mut lo = if lower.is_finite() { lower.max(floor) } else { floor };
    let mut hi = smax - y_one;
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        lo = if lower.is_finite() { lower } else { f64::NEG_INFINITY };
        hi = f64::INFINITY;
    }
    let mut gamma = if gamma > lo && gamma < hi { gamma } else { 0.5 * (lo + hi) };
    let mut hv = h(gamma);
    // h at the bracket ends, for false-position steps.
    let mut h_lo = if lo.is_finite() { h(lo) } else { f64::NAN };
    let mut h_hi = if hi.is_finite() { h(hi) } else { f64::NAN };
    if h_lo == 0.0 {
        gamma = lo;
        hv = 0.0;
    } else if h_hi == 0.0 {
        gamma = hi;
        hv = 0.0;
    }
    // Unhalved values at the bracket ends.
    let (mut raw_lo, mut raw_hi) = (h_lo, h_hi);
    let mut side = 0_i8;
    let mut expand = 1.0_f64;
    let mut iterations = 0;
    let mut bisection_steps = 0;

    while iterations < cfg.max_iter {
        if hv.is_nan() {
            break;
        }
        // Illinois rule: halve the stale end's value when one end repeats.
        if hv > 0.0 {
            lo = gamma;
            h_lo = hv;
            raw_lo = hv;
            if side == 1 {
                h_hi *= 0.5;
            }
            side = 1;
        } else if hv < 0.0 {
            hi = gamma;
            h_hi = hv;
            raw_hi = hv;
            if side == -1 {
                h_lo *= 0.5;
            }
            side = -1;
        } else {
            break;
        }
        iterations += 1;

        let slope = hp(gamma);
        // Far on the steep side Newton can creep along exponential tails;
        // bisect while its step is negligible against the bracket.
        let creeping = hv > 1.0
            && lo.is_finite()
            && hi.is_finite()
            && hv / slope < CREEP_FRACTION * (hi - lo);
        let newton = if !creeping && slope > 0.0 && slope.is_finite() && hv.is_finite() {
            gamma + hv / slope
        } else {
            f64::NAN
        };
        let mut next = f64::NAN;
        let mut next_h = f64::NAN;
        if newton.is_finite() && newton > lo && newton < hi {
            let nh = h(newton);
            if nh.abs() <= hv.abs() {
                next = newton;
                next_h = nh;
            }
        }
        if next.is_nan() {
            bisection_steps += 1;
            let secant = hi - h_hi * (hi - lo) / (h_hi - h_lo);
            next = if lo.is_finite() && hi.is_finite() {
                if h_lo > 0.0 && h_hi < 0.0 && h_lo.is_finite() && secant > lo && secant < hi {
                    secant
                } else {
                    0.5 * (lo + hi)
                }
            } else if hi.is_finite() {
                expand *= 2.0;
                hi - expand
            } else {
                expand *= 2.0;
                lo + expand
            };
            next_h = h(next);
        }
        let step = (next - gamma).abs();
        gamma = next;
        hv = next_h;
        let scale = 1.0 + gamma.abs();
        if step < cfg.tol * scale || (hi - lo) < cfg.tol * scale {
            break;
        }
    }

    // A root hugging a bracket end can leave the end itself as the best point.
    for (end, value) in [(lo, raw_lo), (hi, raw_hi)] {
        if end.is_finite() && value.abs() < hv.abs() {
            gamma = end;
            hv = value;
        }
    }
    let residual = hv.abs();
    // Where h is steep the residual cannot drop below its slope times the
    // resolution of γ; a Newton correction below tolerance is then accepted.
    let correction = residual / hp(gamma);
    let converged = residual <= RESIDUAL_TOL
        || (correction.is_finite() && correction <= 10.0 * cfg.tol * (1.0 + gamma.abs()));
    if !converged {
        return Err(Error::Solver {
            message: format!("{}: gamma iteration did not converge", spec.name()),
            diagnostics: SolveDiagnostics {
                iterations,
                last_value: gamma,
                residual,
            },
        });
    }

    let weights: Vec<f64> = f
        .iter()
        .zip(nu)
        .map(|(&v, &w)| if w > 0.0 { w * d2(v - gamma) } else { 0.0 })
        .collect();
    let total: f64 = weights.iter().sum();
    let grad = if total > 0.0 && total.is_finite() {
        weights.iter().map(|w| w / total).collect()
    } else {
        // Degenerate curvature at the root; fall back to μ*.
        f.iter()
            .zip(nu)
            .map(|(&v, &w)| if w > 0.0 { w * d1(v - gamma) } else { 0.0 })
            .collect()
    };

    Ok(GammaSolution {
        gamma,
        grad,
        iterations,
        bisection_steps,
        converged,
        residual,
        method: SolveMethod::Newton,
        at_bound: false,
        bound_index: None,
    })
}

/// Value, shift and gradient of the tight conjugate in one pass.
pub fn conjugate(
    spec: &GeneratorSpec,
    f: &[f64],
    nu: &[f64],
    cfg: &SolverConfig,
) -> Result<Conjugate> {
    validate(f, nu, cfg)?;
    conjugate_unchecked(spec, f, nu, cfg)
}

pub(crate) fn conjugate_unchecked(
    spec: &GeneratorSpec,
    f: &[f64],
    nu: &[f64],
    cfg: &SolverConfig,
) -> Result<Conjugate> {
    let gamma = solve_gamma_unchecked(spec, f, nu, cfg)?;
    if spec.is_trivial() {
        return Ok(Conjugate {
            value: dot(nu, f),
            gradient: nu.to_vec(),
            gamma,
        });
    }
    let shift = if cfg.stabilize { max_entry(f) } else { 0.0 };
    let g0 = gamma.gamma - shift;
    // On the feasibility bound every argument is ≤ φ'(∞) in exact arithmetic;
    // rounding in `f − γ` must not push the maximal entry past it.
    let cap = if gamma.at_bound { spec.phi_prime_inf } else { f64::INFINITY };
    let inner: f64 = f
        .iter()
        .zip(nu)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&v, &w)| w * (spec.phi_plus_conj)((v - shift - g0).min(cap)))
        .sum();
    let value = inner + g0 + shift;

    let mut gradient: Vec<f64> = f
        .iter()
        .zip(nu)
        .map(|(&v, &w)| {
            if w > 0.0 {
                w * (spec.phi_plus_conj_d1)((v - gamma.gamma).min(cap))
            } else {
                0.0
            }
        })
        .collect();
    if gamma.at_bound {
        let k = gamma.bound_index.unwrap_or_else(|| first_argmax(f));
        let mass: f64 = gradient.iter().sum();
        gradient[k] += (1.0 - mass).max(0.0);
    }
    Ok(Conjugate {
        value,
        gamma,
        gradient,
    })
}

/// `D_φ*(f‖ν) = ⟨ν, φ₊*(f − γ)⟩ + γ`.
pub fn conjugate_value(
    spec: &GeneratorSpec,
    f: &[f64],
    nu: &[f64],
    cfg: &SolverConfig,
) -> Result<f64> {
    Ok(conjugate(spec, f, nu, cfg)?.value)
}

/// `∇_f D_φ*(f‖ν)`, the optimal `μ*` in the supremum defining the conjugate.
pub fn conjugate_gradient(
    spec: &GeneratorSpec,
    f: &[f64],
    nu: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    Ok(conjugate(spec, f, nu, cfg)?.gradient)
}

/// Explicit total-variation conjugate,
/// `⟨ν, −χ(y < −1) + y χ(−1 ≤ y ≤ 1)⟩ + max f − 1` with `y = f − max f + 1`.
pub fn total_variation_conjugate(f: &[f64], nu: &[f64]) -> f64 {
    let m = max_entry(f);
    let inner: f64 = f
        .iter()
        .zip(nu)
        .map(|(&v, &w)| {
            let y = v - m + 1.0;
            if y < -1.0 {
                -w
            } else {
                w * y
            }
        })
        .sum();
    inner + m - 1.0
}

/// Hessian of `f ↦ D_φ*(f‖ν)` from the implicit gradient of `γ`.
///
/// With `w = ν ⊙ (φ₊*)''(f − γ)` this is `diag(w) − w wᵀ/Σw`; when the
/// feasibility bound is active at index `k` the `k`-th row and column carry
/// `−w` and `Σw` instead. Zero for piecewise-linear conjugates.
pub fn conjugate_hessian(
    spec: &GeneratorSpec,
    f: &[f64],
    nu: &[f64],
    gamma: &GammaSolution,
) -> DMatrix<f64> {
    let n = f.len();
    let mut hess = DMatrix::zeros(n, n);
    if spec.is_trivial() || !spec.newton_applicable {
        return hess;
    }
    let w: Vec<f64> = f
        .iter()
        .zip(nu)
        .map(|(&v, &m)| {
            if m > 0.0 {
                m * (spec.phi_plus_conj_d2)(v - gamma.gamma)
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = w.iter().sum();
    for i in 0..n {
        hess[(i, i)] = w[i];
    }
    if gamma.at_bound {
        let k = gamma.bound_index.unwrap_or(0);
        for i in 0..n {
            if i != k {
                hess[(i, k)] -= w[i];
                hess[(k, i)] -= w[i];
            }
        }
        hess[(k, k)] += total;
    } else if total > 0.0 {
        for i in 0..n {
            for j in 0..n {
                hess[(i, j)] -= w[i] * w[j] / total;
            }
        }
    }
    hess
}

/// Outcome of checking the Csiszár-potential conditions for `(μ, ν, f)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsiszarReport {
    /// Best additive constant found.
    pub c: f64,
    /// `max(0, sup f + C − φ'(∞))`.
    pub bound_violation: f64,
    /// `max_{νᵢ>0} dist(μᵢ/νᵢ, ∂φ₊*(fᵢ + C))`.
    pub ratio_violation: f64,
    /// `max_{νᵢ=0<μᵢ} |fᵢ + C − φ'(∞)|`.
    pub singular_violation: f64,
    pub max_violation: f64,
    pub ok: bool,
}

/// Width of the neighbourhood in which a kink of a piecewise-linear
/// conjugate is considered hit.
const KINK_TOL: f64 = 1e-9;

/// `∂φ₊*(y)`; for total variation, points within `δ` of a kink are snapped
/// onto it, since a potential computed in floating point never lands
/// exactly on `±1`.
fn subdifferential_hull(spec: &GeneratorSpec, y: f64) -> (f64, f64) {
    if spec.generator != Generator::TotalVariation {
        return spec.conj_subdifferential(y);
    }
    let snapped = if (y - 1.0).abs() <= KINK_TOL {
        1.0
    } else if (y + 1.0).abs() <= KINK_TOL {
        -1.0
    } else {
        y
    };
    spec.conj_subdifferential(snapped)
}

fn csiszar_violation(spec: &GeneratorSpec, mu: &[f64], nu: &[f64], f: &[f64], c: f64) -> (f64, f64, f64) {
    let slope = spec.phi_prime_inf;
    let bound = if slope.is_finite() {
        (max_entry(f) + c - slope).max(0.0)
    } else {
        0.0
    };
    let mut ratio = 0.0_f64;
    let mut singular = 0.0_f64;
    for i in 0..f.len() {
        if nu[i] > 0.0 {
            let u = mu[i] / nu[i];
            let (lo, hi) = subdifferential_hull(spec, f[i] + c);
            let d = if lo == f64::INFINITY {
                f64::INFINITY
            } else if u < lo {
                lo - u
            } else if u > hi {
                u - hi
            } else {
                0.0
            };
            ratio = ratio.max(d);
        } else if mu[i] > 0.0 {
            singular = singular.max((f[i] + c - slope).abs());
        }
    }
    (bound, ratio, singular)
}

/// Checks whether `f` is a Csiszár potential of `μ, ν`, searching the
/// additive constant `C` by a one-dimensional minimization of the largest
/// condition violation.
pub fn check_csiszar_potential(
    spec: &GeneratorSpec,
    mu: &[f64],
    nu: &[f64],
    f: &[f64],
    tol: f64,
) -> Result<CsiszarReport> {
    ensure_same_len(mu, nu)?;
    ensure_same_len(f, nu)?;
    ensure_finite(f)?;
    ensure_simplex(mu, 1e-9)?;
    ensure_simplex(nu, 1e-9)?;

    let total = |c: f64| {
        let (a, b, s) = csiszar_violation(spec, mu, nu, f, c);
        a.max(b).max(s)
    };

    let slope = spec.phi_prime_inf;
    let upper = slope - max_entry(f);
    let mut candidates = Vec::new();
    for i in 0..f.len() {
        if nu[i] > 0.0 {
            let u = mu[i] / nu[i];
            match spec.generator {
                Generator::TotalVariation => {
                    candidates.push(-1.0 - f[i]);
                    candidates.push(1.0 - f[i]);
                }
                Generator::Trivial => candidates.push(0.0),
                _ => {
                    if let Some(pot) = spec.potential_from_ratio {
                        let p = pot(u);
                        if p.is_finite() {
                            candidates.push(p - f[i]);
                        }
                    }
                }
            }
        } else if mu[i] > 0.0 && slope.is_finite() {
            candidates.push(slope - f[i]);
        }
    }
    if candidates.is_empty() {
        candidates.push(0.0);
    }
    let cmin = candidates.iter().copied().fold(f64::INFINITY, f64::min);
    let cmax = candidates.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut best_c = f64::NAN;
    let mut best = f64::INFINITY;
    let consider = |c: f64, best_c: &mut f64, best: &mut f64| {
        if c.is_nan() {
            return;
        }
        let v = total(c);
        if v < *best || best_c.is_nan() {
            *best = v;
            *best_c = c;
        }
    };
    for &c in &candidates {
        consider(c.min(upper), &mut best_c, &mut best);
    }

    // Golden-section search; the violation is a max of quasiconvex terms.
    let mut a = cmin - 1.0;
    let mut b = (cmax + 1.0).min(upper);
    if a > b {
        a = b - 2.0;
    }
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = total(x1);
    let mut f2 = total(x2);
    for _ in 0..200 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = total(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = total(x2);
        }
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    consider(0.5 * (a + b), &mut best_c, &mut best);

    let (bound_violation, ratio_violation, singular_violation) =
        csiszar_violation(spec, mu, nu, f, best_c);
    let max_violation = bound_violation.max(ratio_violation).max(singular_violation);
    Ok(CsiszarReport {
        c: best_c,
        bound_violation,
        ratio_violation,
        singular_violation,
        max_violation,
        ok: max_violation <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::get_spec;
    use std::f64::consts::{E, LN_2};

    fn spec(name: &str) -> GeneratorSpec {
        get_spec(name).unwrap()
    }

    #[test]
    fn kl_examples() {
        let kl = spec("kl");
        let cfg = SolverConfig::default();
        let s = solve_gamma(&kl, &[0.0, 0.0], &[0.5, 0.5], &cfg).unwrap();
        assert!(s.gamma.abs() < 1e-15);
        let expected = (0.3 * E + 0.7 * E * E).ln();
        let closed = solve_gamma(&kl, &[1.0, 2.0], &[0.3, 0.7], &cfg).unwrap();
        let newton = solve_gamma(&kl, &[1.0, 2.0], &[0.3, 0.7], &SolverConfig::newton()).unwrap();
        assert!((closed.gamma - expected).abs() < 1e-14);
        assert!((newton.gamma - expected).abs() < 1e-10);
        assert!((expected - 1.789728).abs() < 1e-6);
        assert_eq!(newton.method, SolveMethod::Newton);

        assert!(conjugate_value(&kl, &[0.0, 0.0], &[0.5, 0.5], &cfg).unwrap().abs() < 1e-15);
        let g = conjugate_gradient(&kl, &[1.0, 2.0], &[0.3, 0.7], &cfg).unwrap();
        let z = 0.3 * E + 0.7 * E * E;
        assert!((g[0] - 0.3 * E / z).abs() < 1e-14);
        assert!((g[1] - 0.7 * E * E / z).abs() < 1e-14);
        assert!((g[0] - 0.136190).abs() < 1e-6);
        let g0 = conjugate_gradient(&kl, &[0.0, 0.0], &[0.5, 0.5], &cfg).unwrap();
        assert_eq!(g0, vec![0.5, 0.5]);
    }

    #[test]
    fn total_variation_closed_form() {
        let tv = spec("total_variation");
        let cfg = SolverConfig::default();
        for nu in [[0.5, 0.5], [0.1, 0.9], [1.0, 0.0]] {
            let s = solve_gamma(&tv, &[0.2, -0.5], &nu, &cfg).unwrap();
            assert!((s.gamma + 0.8).abs() < 1e-15);
            assert_eq!(s.method, SolveMethod::ClosedForm);
        }
        let f = [0.3, -2.5, 0.1, -1.2];
        let nu = [0.1, 0.2, 0.3, 0.4];
        let v = conjugate_value(&tv, &f, &nu, &cfg).unwrap();
        assert!((v - total_variation_conjugate(&f, &nu)).abs() < 1e-15);
        // Newton is not used even when closed forms are disabled.
        let v2 = conjugate_value(&tv, &f, &nu, &SolverConfig::newton()).unwrap();
        assert_eq!(v, v2);
        let g = conjugate_gradient(&tv, &f, &nu, &cfg).unwrap();
        assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(g.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn trivial_and_constant_examples() {
        let cfg = SolverConfig::default();
        let v = conjugate_value(&spec("trivial"), &[3.0, -1.0], &[0.25, 0.75], &cfg).unwrap();
        assert!(v.abs() < 1e-15);
        let chi2 = spec("chi2");
        for nu in [[0.5, 0.5], [0.2, 0.8]] {
            let v = conjugate_value(&chi2, &[1.7, 1.7], &nu, &cfg).unwrap();
            assert!((v - 1.7).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_inputs() {
        let kl = spec("kl");
        let cfg = SolverConfig::default();
        assert!(solve_gamma(&kl, &[0.0], &[0.5, 0.5], &cfg).is_err());
        assert!(solve_gamma(&kl, &[0.0, 1.0], &[0.5, 0.6], &cfg).is_err());
        assert!(solve_gamma(&kl, &[0.0, 1.0], &[1.5, -0.5], &cfg).is_err());
        assert!(solve_gamma(&kl, &[f64::NAN, 1.0], &[0.5, 0.5], &cfg).is_err());
        let bad = SolverConfig { tol: 0.0, ..cfg };
        assert!(solve_gamma(&kl, &[0.0, 1.0], &[0.5, 0.5], &bad).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        let rkl = spec("reverse_kl");
        let cfg = SolverConfig {
            max_iter: 1,
            ..SolverConfig::default()
        };
        let err = solve_gamma(&rkl, &[3.0, -4.0, 0.5], &[0.2, 0.3, 0.5], &cfg).unwrap_err();
        assert!(matches!(err, Error::Solver { .. }), "{err}");
    }

    #[test]
    fn chi2_flat_region_uses_bisection() {
        // Start deep in the flat region of (φ₊*)'' where plain Newton stalls.
        let chi2 = spec("chi2");
        let f = [0.0, -50.0, -60.0];
        let nu = [0.001, 0.5, 0.499];
        let s = solve_gamma(&chi2, &f, &nu, &SolverConfig::default()).unwrap();
        assert!(s.residual <= RESIDUAL_TOL);
        assert!(s.bisection_steps > 0);
        let tri = spec("triangular");
        let s = solve_gamma(&tri, &f, &nu, &SolverConfig::default()).unwrap();
        assert!(s.residual <= RESIDUAL_TOL);
    }

    #[test]
    fn all_newton_generators_reach_residual() {
        let f = [0.4, -1.3, 2.2, 0.0, -0.7];
        let nu = [0.1, 0.3, 0.05, 0.35, 0.2];
        for g in Generator::LEGENDRE {
            let s = solve_gamma(&g.spec(), &f, &nu, &SolverConfig::newton()).unwrap();
            assert!(s.converged && s.residual <= RESIDUAL_TOL, "{g}: {s:?}");
            assert!((s.grad.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(s.gamma > 2.2 - g.spec().phi_prime_inf, "{g}");
        }
    }

    #[test]
    fn mixed_support_binding_bound() {
        // argmax outside supp(ν) pushes γ onto max f − φ'(∞).
        let rkl = spec("reverse_kl");
        let f = [0.0, 0.0, 5.0];
        let nu = [0.5, 0.5, 0.0];
        let cfg = SolverConfig::default();
        let c = conjugate(&rkl, &f, &nu, &cfg).unwrap();
        assert!(c.gamma.at_bound);
        assert!((c.gamma.gamma - 4.0).abs() < 1e-15);
        let expected = -(-(0.0 - 4.0_f64)).ln_1p() + 4.0; // -log(1 - (0-4)) + 4
        assert!((c.value - expected).abs() < 1e-12);
        let mass: f64 = c.gradient.iter().sum();
        assert!((mass - 1.0).abs() < 1e-15);
        assert!((c.gradient[0] - 0.1).abs() < 1e-12);
        assert!((c.gradient[2] - 0.8).abs() < 1e-12);

        // Off-support points below the bound only enter the feasibility max.
        let f = [0.0, 0.3, -5.0];
        let a = conjugate_value(&rkl, &f, &nu, &cfg).unwrap();
        let b = conjugate_value(&rkl, &f[..2], &[0.5, 0.5], &cfg).unwrap();
        assert!((a - b).abs() < 1e-14);
        // φ'(∞) = ∞: off-support entries never matter.
        let kl = spec("kl");
        let a = conjugate_value(&kl, &[0.0, 0.3, 50.0], &nu, &cfg).unwrap();
        let b = conjugate_value(&kl, &[0.0, 0.3], &[0.5, 0.5], &cfg).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn stabilization_handles_large_potentials() {
        let f = [800.0, 790.0, 805.0];
        let nu = [0.2, 0.3, 0.5];
        for g in Generator::ALL {
            let v = conjugate_value(&g.spec(), &f, &nu, &SolverConfig::default()).unwrap();
            assert!(v.is_finite() && v > 789.0 && v <= 805.0 + 1e-9, "{g}: {v}");
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let f = [0.4, -1.3, 0.9, 0.0];
        let nu = [0.1, 0.3, 0.25, 0.35];
        let h = 1e-6;
        let cfg = SolverConfig::default();
        for g in Generator::LEGENDRE {
            let s = g.spec();
            let c = conjugate(&s, &f, &nu, &cfg).unwrap();
            let hess = conjugate_hessian(&s, &f, &nu, &c.gamma);
            for j in 0..f.len() {
                let mut fp = f;
                let mut fm = f;
                fp[j] += h;
                fm[j] -= h;
                let gp = conjugate_gradient(&s, &fp, &nu, &cfg).unwrap();
                let gm = conjugate_gradient(&s, &fm, &nu, &cfg).unwrap();
                for i in 0..f.len() {
                    let fd = (gp[i] - gm[i]) / (2.0 * h);
                    assert!((fd - hess[(i, j)]).abs() < 1e-6, "{g} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn csiszar_examples() {
        let kl = spec("kl");
        let r = check_csiszar_potential(
            &kl,
            &[0.75, 0.25],
            &[0.5, 0.5],
            &[1.5f64.ln(), 0.5f64.ln()],
            1e-12,
        )
        .unwrap();
        assert!(r.ok && r.c.abs() < 1e-12 && r.max_violation <= 1e-12, "{r:?}");

        let r = check_csiszar_potential(&kl, &[0.3, 0.7], &[0.3, 0.7], &[2.0, 2.0], 1e-12).unwrap();
        assert!(r.ok, "{r:?}");

        let chi2 = spec("chi2");
        let r = check_csiszar_potential(&chi2, &[0.75, 0.25], &[0.5, 0.5], &[1.0, -1.0], 1e-12).unwrap();
        assert!(r.ok && r.c.abs() < 1e-12, "{r:?}");

        // A wrong potential is rejected.
        let r = check_csiszar_potential(&kl, &[0.75, 0.25], &[0.5, 0.5], &[0.0, 1.0], 1e-6).unwrap();
        assert!(!r.ok);
    }

    #[test]
    fn csiszar_singular_mass() {
        // reverse KL, μ has mass outside supp(ν): potential must sit at φ'(∞) there.
        let rkl = spec("reverse_kl");
        let mu = [0.25, 0.25, 0.5];
        let nu = [0.5, 0.5, 0.0];
        // consistent on supp(ν) but not at the singular atom
        let f = [0.5, 0.5, 1.0];
        let good = [-1.0 + 3.0, -1.0 + 3.0, 1.0 + 3.0];
        let r = check_csiszar_potential(&rkl, &mu, &nu, &good, 1e-10).unwrap();
        assert!(r.ok, "{r:?}");
        let r = check_csiszar_potential(&rkl, &mu, &nu, &f, 1e-6).unwrap();
        assert!(!r.ok);
    }

    #[test]
    fn jensen_shannon_bound() {
        let js = spec("jensen_shannon");
        let s = solve_gamma(&js, &[0.0, -3.0], &[0.5, 0.5], &SolverConfig::default()).unwrap();
        assert!(s.gamma > -LN_2);
    }
}
