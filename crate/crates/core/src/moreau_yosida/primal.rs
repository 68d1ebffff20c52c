//! Primal route: `min_ξ D_φ(ξ‖ν) + λ W₁(μ,ξ)^α`.
//!
//! The barrier solver optimizes over plans `π` with row sums `μ` and reads
//! `ξ` off the column sums. Since `W₁(μ,ξ) = min_π ⟨π, d⟩`, the lifted problem
//!
//! ```text
//! min_π  Σⱼ gⱼ(Σᵢ πᵢⱼ) + λ ⟨π, d⟩^α,   gⱼ(x) = νⱼ φ₊(x/νⱼ)  (or φ'(∞)·x off supp ν)
//! ```
//!
//! has the same value, is smooth and convex for `α ≥ 1`, and its Hessian is
//! diagonal plus rank `k + 1`, which the Newton steps exploit.

use nalgebra::{DMatrix, DVector};

use super::{tv, Alpha, MYConfig, MYParams, MYResult, PrimalMethod, Problem};
use crate::catalog::GeneratorSpec;
use crate::error::{Error, Result};
use crate::linalg::{project_simplex, spd_solve, DiagPlusLowRank};
use crate::measures::{DiscreteMeasure, FiniteMetricSpace};
use crate::transport::{kantorovich_potential, w1_distance};

/// Barrier parameter of the first stage and its reduction factor.
const TAU_START: f64 = 0.1;
const TAU_FACTOR: f64 = 0.1;
/// Half squared Newton decrement at which a stage is considered centered.
const CENTERED: f64 = 1e-13;
/// Bound on `|φ₊'|` used by the subgradient method near the boundary.
const SUBGRADIENT_CLAMP: f64 = 1e3;

/// Minimizes the primal objective and returns `ξ*` with the objective
/// recomputed exactly at `ξ*`.
pub fn my_primal(
    spec: &GeneratorSpec,
    space: &FiniteMetricSpace,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    params: &MYParams,
    cfg: &MYConfig,
) -> Result<MYResult> {
    let pb = Problem::new(spec, space, mu, nu, params)?;
    if pb.same_measures() {
        return Ok(MYResult::exact(0.0, Some(pb.nu.to_vec()), None, "exact"));
    }
    let w_mu_nu = w1_distance(space, pb.mu, pb.nu)?;
    if spec.is_trivial() {
        let value = params.transport_cost(w_mu_nu);
        let xi = value.is_finite().then(|| pb.nu.to_vec());
        return Ok(MYResult::exact(value, xi, None, "exact"));
    }
    if let Alpha::Infinite = params.alpha {
        let beta = params.beta.unwrap_or(0.0);
        if w_mu_nu <= beta {
            return Ok(MYResult::exact(0.0, Some(pb.nu.to_vec()), None, "exact"));
        }
        let (reach, xi) = pb.closest_reachable();
        if reach > beta + 1e-12 {
            return Ok(MYResult::exact(f64::INFINITY, None, None, "exact"));
        }
        if reach >= beta - 1e-12 {
            let value = pb.primal_objective(&xi)?;
            return Ok(MYResult::exact(value, Some(xi), None, "boundary"));
        }
    }
    let mut result = if super::is_total_variation(spec) {
        tv_primal(&pb)?
    } else {
        let experimental = matches!(params.alpha, Alpha::Finite(a) if a < 1.0);
        match (cfg.primal, experimental) {
            (PrimalMethod::Barrier, false) => barrier(&pb, cfg)?,
            _ => subgradient(&pb, cfg)?,
        }
    };
    // ξ = ν and ξ = μ are always feasible.
    for candidate in [pb.nu, pb.mu] {
        let v = pb.primal_objective(candidate)?;
        if v < result.value {
            result.value = v;
            result.xi_star = Some(candidate.to_vec());
        }
    }
    Ok(result)
}

fn tv_primal(pb: &Problem) -> Result<MYResult> {
    let sol = tv::solve(pb)?;
    // At a kink of the profile the minimizer is a mixture of the points read
    // off just below and just above the optimal slope.
    let below = tv::primal_point(pb, sol.s * (1.0 - 1e-7))?;
    let above = tv::primal_point(pb, sol.s * (1.0 + 1e-7))?;
    let mix = |theta: f64| -> Vec<f64> {
        below
            .iter()
            .zip(&above)
            .map(|(a, b)| theta * a + (1.0 - theta) * b)
            .collect()
    };
    let theta = match pb.params.alpha {
        Alpha::Infinite => {
            // Largest weight on the cheaper-divergence end that stays in the ball.
            let beta = pb.params.beta.unwrap_or(0.0);
            let radius = |t: f64| w1_distance(pb.space, pb.mu, &mix(t));
            if radius(1.0)? <= beta {
                1.0
            } else {
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if radius(mid)? <= beta {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
        Alpha::Finite(_) => golden_min(|t| pb.primal_objective(&mix(t)), 0.0, 1.0, 1e-12)?,
    };
    let mut best = (f64::INFINITY, Vec::new());
    for theta in [0.0, 1.0, theta] {
        let xi = mix(theta);
        let v = pb.primal_objective(&xi)?;
        if v < best.0 {
            best = (v, xi);
        }
    }
    let xi = tv::primal_point(pb, sol.s)?;
    let v = pb.primal_objective(&xi)?;
    if v < best.0 {
        best = (v, xi);
    }
    let (value, xi) = best;
    Ok(MYResult {
        value,
        xi_star: Some(xi),
        f_star: None,
        converged: true,
        iterations: sol.iterations,
        gap_estimate: (value - sol.value).max(0.0),
        method: "transport-profile".into(),
        experimental: false,
    })
}

enum Penalty {
    Power { lambda: f64, alpha: f64 },
    Ball { beta: f64 },
}

struct Lifted<'a> {
    spec: &'a GeneratorSpec,
    nu: &'a [f64],
    rows: Vec<usize>,
    row_mass: Vec<f64>,
    cols: Vec<usize>,
    /// `d(rows[r], cols[c])` at `r * k + c`.
    dist: Vec<f64>,
    k: usize,
    penalty: Penalty,
}

impl<'a> Lifted<'a> {
    fn new(pb: &'a Problem) -> Self {
        let rows: Vec<usize> = (0..pb.n()).filter(|&i| pb.mu[i] > 0.0).collect();
        let cols = pb.allowed_columns();
        let dist = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| pb.space.d(i, j)))
            .collect();
        let penalty = match pb.params.alpha {
            Alpha::Finite(alpha) => Penalty::Power {
                lambda: pb.params.lambda,
                alpha,
            },
            Alpha::Infinite => Penalty::Ball {
                beta: pb.params.beta.unwrap_or(0.0),
            },
        };
        Self {
            spec: pb.spec,
            nu: pb.nu,
            row_mass: rows.iter().map(|&i| pb.mu[i]).collect(),
            k: cols.len(),
            rows,
            cols,
            dist,
            penalty,
        }
    }

    fn len(&self) -> usize {
        self.rows.len() * self.k
    }

    fn column_sums(&self, x: &[f64]) -> Vec<f64> {
        let mut xi = vec![0.0; self.k];
        for row in x.chunks(self.k) {
            for (acc, &v) in xi.iter_mut().zip(row) {
                *acc += v;
            }
        }
        xi
    }

    fn cost(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.dist).map(|(a, b)| a * b).sum()
    }

    /// `(g, g', g'')` for column `c` at mass `x`.
    fn column_terms(&self, c: usize, x: f64) -> (f64, f64, f64) {
        let nu = self.nu[self.cols[c]];
        if nu > 0.0 {
            let u = x / nu;
            (
                nu * (self.spec.phi_plus)(u),
                (self.spec.phi_plus_d1)(u),
                (self.spec.phi_plus_d2)(u) / nu,
            )
        } else {
            let slope = self.spec.phi_prime_inf;
            (slope * x, slope, 0.0)
        }
    }

    /// Barrier objective; `+∞` outside the domain.
    fn barrier_value(&self, x: &[f64], tau: f64) -> f64 {
        if x.iter().any(|&v| v <= 0.0) {
            return f64::INFINITY;
        }
        let xi = self.column_sums(x);
        let mut total: f64 = xi
            .iter()
            .enumerate()
            .map(|(c, &v)| self.column_terms(c, v).0)
            .sum();
        let cost = self.cost(x);
        match self.penalty {
            Penalty::Power { lambda, alpha } => total += lambda * cost.powf(alpha),
            Penalty::Ball { beta } => {
                if cost >= beta {
                    return f64::INFINITY;
                }
                total -= tau * (beta - cost).ln();
            }
        }
        total -= tau * x.iter().map(|v| v.ln()).sum::<f64>();
        if total.is_nan() {
            f64::INFINITY
        } else {
            total
        }
    }

    fn start(&self) -> Vec<f64> {
        let k = self.k as f64;
        let mut x: Vec<f64> = self
            .row_mass
            .iter()
            .flat_map(|&m| std::iter::repeat_n(m / k, self.k))
            .collect();
        if let Penalty::Ball { beta } = self.penalty {
            let uniform_cost = self.cost(&x);
            if uniform_cost >= beta {
                let mut near = vec![0.0; x.len()];
                let mut near_cost = 0.0;
                for (r, &m) in self.row_mass.iter().enumerate() {
                    let row = &self.dist[r * self.k..(r + 1) * self.k];
                    let (c, d) = row
                        .iter()
                        .enumerate()
                        .fold((0, f64::INFINITY), |b, (c, &d)| if d < b.1 { (c, d) } else { b });
                    near[r * self.k + c] = m;
                    near_cost += m * d;
                }
                let target = 0.5 * (near_cost + beta);
                let theta = (target - near_cost) / (uniform_cost - near_cost);
                for (xv, nv) in x.iter_mut().zip(&near) {
                    *xv = theta * *xv + (1.0 - theta) * nv;
                }
            }
        }
        x
    }

    /// Newton direction for the barrier problem with row-sum constraints,
    /// and the squared Newton decrement.
    fn newton_step(&self, x: &[f64], tau: f64) -> Option<(Vec<f64>, f64)> {
        let (m, k, n) = (self.rows.len(), self.k, self.len());
        let xi = self.column_sums(x);
        let terms: Vec<(f64, f64, f64)> =
            xi.iter().enumerate().map(|(c, &v)| self.column_terms(c, v)).collect();
        let cost = self.cost(x);
        let (pen1, mut pen2) = match self.penalty {
            Penalty::Power { lambda, alpha } => {
                let d1 = lambda * alpha * cost.powf(alpha - 1.0);
                let d2 = if alpha == 1.0 {
                    0.0
                } else {
                    lambda * alpha * (alpha - 1.0) * cost.powf(alpha - 2.0)
                };
                (d1, d2)
            }
            Penalty::Ball { beta } => {
                let slack = beta - cost;
                (tau / slack, tau / (slack * slack))
            }
        };
        if !pen2.is_finite() {
            pen2 = 0.0;
        }
        let mut grad = DVector::zeros(n);
        let mut diag = vec![0.0; n];
        for r in 0..m {
            for c in 0..k {
                let idx = r * k + c;
                grad[idx] = terms[c].1 + pen1 * self.dist[idx] - tau / x[idx];
                diag[idx] = tau / (x[idx] * x[idx]);
            }
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return None;
        }
        let curved: Vec<usize> = (0..k).filter(|&c| terms[c].2 > 0.0 && terms[c].2.is_finite()).collect();
        let rank = curved.len() + usize::from(pen2 > 0.0);
        let mut u = DMatrix::zeros(n, rank);
        for (col, &c) in curved.iter().enumerate() {
            let s = terms[c].2.sqrt();
            for r in 0..m {
                u[(r * k + c, col)] = s;
            }
        }
        if pen2 > 0.0 {
            let s = pen2.sqrt();
            for idx in 0..n {
                u[(idx, rank - 1)] = s * self.dist[idx];
            }
        }
        let hess = DiagPlusLowRank::new(&diag, u);
        let mut rhs = DMatrix::zeros(n, m + 1);
        for idx in 0..n {
            rhs[(idx, 0)] = grad[idx];
            rhs[(idx, 1 + idx / k)] = 1.0;
        }
        let sol = hess.solve(&rhs)?;
        // Schur complement A H⁻¹ Aᵀ and A H⁻¹ g.
        let mut schur = DMatrix::zeros(m, m);
        let mut az = DMatrix::zeros(m, 1);
        for r in 0..m {
            for c in 0..k {
                let idx = r * k + c;
                az[(r, 0)] -= sol[(idx, 0)];
                for r2 in 0..m {
                    schur[(r, r2)] += sol[(idx, 1 + r2)];
                }
            }
        }
        let schur = 0.5 * (&schur + schur.transpose());
        let w = spd_solve(&schur, &az)?;
        let mut step = vec![0.0; n];
        for idx in 0..n {
            let mut v = sol[(idx, 0)];
            for r in 0..m {
                v += sol[(idx, 1 + r)] * w[(r, 0)];
            }
            step[idx] = -v;
        }
        let decrement = -step.iter().zip(grad.iter()).map(|(a, b)| a * b).sum::<f64>();
        Some((step, decrement))
    }

    fn renormalize_rows(&self, x: &mut [f64]) {
        for (row, &m) in x.chunks_mut(self.k).zip(&self.row_mass) {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v *= m / s);
        }
    }

    /// Largest step keeping the iterate strictly feasible.
    fn max_step(&self, x: &[f64], dx: &[f64]) -> f64 {
        let mut t = f64::INFINITY;
        for (&v, &d) in x.iter().zip(dx) {
            if d < 0.0 {
                t = t.min(-v / d);
            }
        }
        if let Penalty::Ball { beta } = self.penalty {
            let dc = self.cost(dx);
            if dc > 0.0 {
                t = t.min((beta - self.cost(x)) / dc);
            }
        }
        t
    }

    fn full_measure(&self, x: &[f64], n: usize) -> Vec<f64> {
        let mut xi = vec![0.0; n];
        for (c, v) in self.column_sums(x).into_iter().enumerate() {
            xi[self.cols[c]] = v;
        }
        xi
    }
}

/// Result of centering one barrier stage.
struct Centering {
    steps: usize,
    decrement: f64,
}

fn center(lifted: &Lifted, x: &mut Vec<f64>, tau: f64, max_steps: usize) -> Centering {
    let mut steps = 0;
    let mut decrement = f64::INFINITY;
    let mut value = lifted.barrier_value(x, tau);
    while steps < max_steps {
        let Some((dx, dec)) = lifted.newton_step(x, tau) else {
            break;
        };
        decrement = dec;
        if !(dec > 0.0) || dec / 2.0 <= CENTERED {
            decrement = dec.max(0.0);
            break;
        }
        steps += 1;
        let mut t = (0.99 * lifted.max_step(x, &dx)).min(1.0);
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + t * b).collect();
            let v = lifted.barrier_value(&trial, tau);
            if v <= value - 0.25 * t * dec {
                let mut fixed = trial.clone();
                lifted.renormalize_rows(&mut fixed);
                let fv = lifted.barrier_value(&fixed, tau);
                // Row rescaling can push the plan across the ball boundary.
                (*x, value) = if fv.is_finite() { (fixed, fv) } else { (trial, v) };
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Centering { steps, decrement }
}

fn barrier(pb: &Problem, cfg: &MYConfig) -> Result<MYResult> {
    let lifted = Lifted::new(pb);
    let mut x = lifted.start();
    let constraints = lifted.len() as f64 + f64::from(matches!(lifted.penalty, Penalty::Ball { .. }));
    let mut tau = TAU_START;
    let mut iterations = 0;
    let mut last;
    loop {
        last = center(&lifted, &mut x, tau, cfg.max_newton);
        iterations += last.steps;
        if constraints * tau <= cfg.tol {
            break;
        }
        tau *= TAU_FACTOR;
    }
    lifted.renormalize_rows(&mut x);
    let mut xi = lifted.full_measure(&x, pb.n());
    if let Penalty::Ball { beta } = lifted.penalty {
        xi = pull_into_ball(pb, xi, lifted.full_measure(&lifted.start(), pb.n()), beta)?;
    }
    let value = pb.primal_objective(&xi)?;
    if !value.is_finite() {
        return Err(Error::Solver {
            message: "barrier primal ended at an infeasible point".into(),
            diagnostics: crate::error::SolveDiagnostics {
                iterations,
                last_value: value,
                residual: last.decrement,
            },
        });
    }
    Ok(MYResult {
        value,
        xi_star: Some(xi),
        f_star: None,
        converged: last.decrement / 2.0 <= 1e-8,
        iterations,
        gap_estimate: constraints * tau,
        method: "barrier".into(),
        experimental: false,
    })
}

/// Moves `ξ` toward the strictly feasible `inside` until `W₁(μ, ξ) ≤ β`.
/// Rounding in the last barrier stages can leave `ξ` marginally outside;
/// `W₁(μ, ·)` is convex, so the feasible mixtures form an interval.
fn pull_into_ball(pb: &Problem, xi: Vec<f64>, inside: Vec<f64>, beta: f64) -> Result<Vec<f64>> {
    if w1_distance(pb.space, pb.mu, &xi)? <= beta {
        return Ok(xi);
    }
    let mix = |t: f64| -> Vec<f64> { xi.iter().zip(&inside).map(|(a, b)| (1.0 - t) * a + t * b).collect() };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if w1_distance(pb.space, pb.mu, &mix(mid))? <= beta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(mix(hi))
}

/// Projected subgradient descent on the simplex, step `c/√t`, keeping the
/// best iterate.
fn subgradient(pb: &Problem, cfg: &MYConfig) -> Result<MYResult> {
    let Alpha::Finite(alpha) = pb.params.alpha else {
        return Err(Error::Unsupported(
            "the subgradient primal does not handle the ball constraint".into(),
        ));
    };
    let lambda = pb.params.lambda;
    let spec = pb.spec;
    let n = pb.n();
    let mut xi = pb.nu.to_vec();
    let mut best = (pb.primal_objective(&xi)?, xi.clone());
    for t in 1..=cfg.subgradient_iters {
        let (w, potential) = kantorovich_potential(pb.space, pb.mu, &xi)?;
        let coef = if w > 0.0 {
            lambda * alpha * w.powf(alpha - 1.0)
        } else if alpha >= 1.0 {
            if alpha == 1.0 { lambda } else { 0.0 }
        } else {
            SUBGRADIENT_CLAMP
        };
        let grad: Vec<f64> = (0..n)
            .map(|j| {
                let div = if pb.nu[j] > 0.0 {
                    (spec.phi_plus_d1)(xi[j] / pb.nu[j])
                } else {
                    spec.phi_prime_inf
                };
                let div = if div.is_nan() { 0.0 } else { div };
                div.clamp(-SUBGRADIENT_CLAMP, SUBGRADIENT_CLAMP) - coef.min(SUBGRADIENT_CLAMP) * potential[j]
            })
            .collect();
        let step = cfg.step_size / (t as f64).sqrt();
        let moved: Vec<f64> = xi.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
        xi = project_simplex(&moved);
        let v = pb.primal_objective(&xi)?;
        if v < best.0 {
            best = (v, xi.clone());
        }
    }
    Ok(MYResult {
        value: best.0,
        xi_star: Some(best.1),
        f_star: None,
        converged: true,
        iterations: cfg.subgradient_iters,
        gap_estimate: f64::NAN,
        method: "subgradient".into(),
        experimental: alpha < 1.0,
    })
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (a + b))
}
