//! Dual route: `max_f ⟨μ,f⟩ − D_φ*(f‖ν) − P(‖f‖_L)` over `f` with `f(x₀) = 0`.
//!
//! The barrier solver introduces `s ≥ ‖f‖_L` through the pairwise
//! constraints `fᵢ − fⱼ ≤ s dᵢⱼ` (with `s = λ` fixed when `α = 1`), so the
//! objective becomes smooth: `⟨μ,f⟩ − D_φ*(f‖ν) − P(s)`. Newton steps use
//! the exact conjugate Hessian.

use nalgebra::{DMatrix, DVector};

use super::{tv, Alpha, DualMethod, MYConfig, MYParams, MYResult, Problem};
use crate::catalog::GeneratorSpec;
use crate::conjugate::{conjugate_hessian, conjugate_unchecked};
use crate::error::{Error, Result};
use crate::linalg::spd_solve_vec;
use crate::measures::{DiscreteMeasure, FiniteMetricSpace};
use crate::transport::{lipschitz_envelope, lipschitz_norm, lipschitz_subgradient, w1_distance};

const TAU_START: f64 = 0.1;
const TAU_FACTOR: f64 = 0.1;
const CENTERED: f64 = 1e-13;
/// Iterates beyond this size are treated as diverging.
const DIVERGED: f64 = 1e12;

/// Maximizes the dual objective; the returned value is the exact objective
/// at the returned potential, clamped at zero.
pub fn my_dual(
    spec: &GeneratorSpec,
    space: &FiniteMetricSpace,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    params: &MYParams,
    cfg: &MYConfig,
) -> Result<MYResult> {
    let pb = Problem::new(spec, space, mu, nu, params)?;
    let n = pb.n();
    if matches!(params.alpha, Alpha::Finite(a) if a < 1.0) {
        return Err(Error::Unsupported(
            "no dual representation for alpha < 1".into(),
        ));
    }
    if pb.same_measures() {
        return Ok(MYResult::exact(0.0, None, Some(vec![0.0; n]), "exact"));
    }
    if let Alpha::Infinite = params.alpha {
        let beta = params.beta.unwrap_or(0.0);
        if w1_distance(space, pb.mu, pb.nu)? <= beta {
            return Ok(MYResult::exact(0.0, None, Some(vec![0.0; n]), "exact"));
        }
        if spec.is_trivial() {
            return Ok(MYResult::exact(f64::INFINITY, None, None, "exact"));
        }
        let (reach, xi) = pb.closest_reachable();
        if reach > beta + 1e-12 {
            return Ok(MYResult::exact(f64::INFINITY, None, None, "exact"));
        }
        if reach >= beta - 1e-12 {
            let value = pb.primal_objective(&xi)?;
            return Ok(MYResult::exact(value, None, None, "boundary"));
        }
    }
    let mut result = if super::is_total_variation(spec) {
        tv_dual(&pb, cfg)?
    } else {
        match cfg.dual {
            DualMethod::Barrier => barrier(&pb, cfg)?,
            DualMethod::Ascent => ascent(&pb, cfg)?,
        }
    };
    result.value = result.value.max(0.0);
    Ok(result)
}

fn tv_dual(pb: &Problem, cfg: &MYConfig) -> Result<MYResult> {
    let sol = tv::solve(pb)?;
    let f = tv::dual_point(pb, sol.s)?;
    let value = pb.dual_objective(&f, &cfg.conjugate)?;
    Ok(MYResult {
        value,
        xi_star: None,
        f_star: Some(f),
        converged: true,
        iterations: sol.iterations,
        gap_estimate: (sol.value - value).abs(),
        method: "transport-profile".into(),
        experimental: false,
    })
}

/// Coefficients of `P(s) = c s^q` for finite `α > 1`.
fn power_penalty(lambda: f64, alpha: f64) -> (f64, f64) {
    let q = alpha / (alpha - 1.0);
    let c = (alpha - 1.0) * alpha.powf(alpha / (1.0 - alpha)) * lambda.powf(1.0 / (1.0 - alpha));
    (c, q)
}

enum Slope {
    Fixed(f64),
    Power { c: f64, q: f64 },
    Linear(f64),
}

struct Lifted<'a> {
    pb: &'a Problem<'a>,
    cfg: &'a MYConfig,
    slope: Slope,
    pairs: Vec<(usize, usize, f64)>,
}

impl<'a> Lifted<'a> {
    fn new(pb: &'a Problem<'a>, cfg: &'a MYConfig) -> Self {
        let slope = match pb.params.alpha {
            Alpha::Finite(1.0) => Slope::Fixed(pb.params.lambda),
            Alpha::Finite(a) => {
                let (c, q) = power_penalty(pb.params.lambda, a);
                Slope::Power { c, q }
            }
            Alpha::Infinite => Slope::Linear(pb.params.beta.unwrap_or(0.0)),
        };
        let n = pb.n();
        let mut pairs = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    pairs.push((i, j, pb.space.d(i, j)));
                }
            }
        }
        Self {
            pb,
            cfg,
            slope,
            pairs,
        }
    }

    fn has_s(&self) -> bool {
        !matches!(self.slope, Slope::Fixed(_))
    }

    fn dim(&self) -> usize {
        self.pb.n() - 1 + usize::from(self.has_s())
    }

    fn unpack(&self, z: &[f64]) -> (Vec<f64>, f64) {
        let n = self.pb.n();
        let mut f = Vec::with_capacity(n);
        f.push(0.0);
        f.extend_from_slice(&z[..n - 1]);
        let s = match self.slope {
            Slope::Fixed(l) => l,
            _ => z[n - 1],
        };
        (f, s)
    }

    /// `(P(s), P'(s), P''(s))`.
    fn penalty(&self, s: f64) -> (f64, f64, f64) {
        match self.slope {
            Slope::Fixed(_) => (0.0, 0.0, 0.0),
            Slope::Linear(beta) => (beta * s, beta, 0.0),
            Slope::Power { c, q } => (
                c * s.powf(q),
                c * q * s.powf(q - 1.0),
                c * q * (q - 1.0) * s.powf(q - 2.0),
            ),
        }
    }

    fn slacks(&self, f: &[f64], s: f64) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|&(i, j, d)| s * d - f[i] + f[j])
            .collect()
    }

    /// Negated barrier objective; `+∞` outside the domain.
    fn value(&self, z: &[f64], tau: f64) -> f64 {
        let (f, s) = self.unpack(z);
        let slacks = self.slacks(&f, s);
        if slacks.iter().any(|&v| v <= 0.0) {
            return f64::INFINITY;
        }
        let Ok(conj) = conjugate_unchecked(self.pb.spec, &f, self.pb.nu, &self.cfg.conjugate)
        else {
            return f64::INFINITY;
        };
        let lin: f64 = self.pb.mu.iter().zip(&f).map(|(a, b)| a * b).sum();
        let v = -lin + conj.value + self.penalty(s).0 - tau * slacks.iter().map(|v| v.ln()).sum::<f64>();
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    fn newton_step(&self, z: &[f64], tau: f64) -> Option<(Vec<f64>, f64)> {
        let n = self.pb.n();
        let dim = self.dim();
        let (f, s) = self.unpack(z);
        let conj = conjugate_unchecked(self.pb.spec, &f, self.pb.nu, &self.cfg.conjugate).ok()?;
        let hess_conj = conjugate_hessian(self.pb.spec, &f, self.pb.nu, &conj.gamma);
        let mut grad = DVector::zeros(dim);
        let mut hess = DMatrix::zeros(dim, dim);
        for a in 1..n {
            grad[a - 1] = conj.gradient[a] - self.pb.mu[a];
            for b in 1..n {
                hess[(a - 1, b - 1)] = hess_conj[(a, b)];
            }
        }
        let si = n - 1;
        if self.has_s() {
            let (_, p1, p2) = self.penalty(s);
            grad[si] += p1;
            hess[(si, si)] += if p2.is_finite() { p2 } else { 0.0 };
        }
        // Each constraint row has at most three nonzeros: f_i, f_j and s.
        for (&(i, j, d), slack) in self.pairs.iter().zip(self.slacks(&f, s)) {
            let mut entries: [(usize, f64); 3] = [(usize::MAX, 0.0); 3];
            let mut len = 0;
            if i > 0 {
                entries[len] = (i - 1, -1.0);
                len += 1;
            }
            if j > 0 {
                entries[len] = (j - 1, 1.0);
                len += 1;
            }
            if self.has_s() {
                entries[len] = (si, d);
                len += 1;
            }
            let inv = 1.0 / slack;
            for &(a, va) in &entries[..len] {
                grad[a] -= tau * va * inv;
                for &(b, vb) in &entries[..len] {
                    hess[(a, b)] += tau * va * vb * inv * inv;
                }
            }
        }
        if grad.iter().any(|g| !g.is_finite()) || hess.iter().any(|h| !h.is_finite()) {
            return None;
        }
        let step = spd_solve_vec(&hess, &(-&grad))?;
        let dec = -grad.dot(&step);
        Some((step.as_slice().to_vec(), dec))
    }

    fn max_step(&self, z: &[f64], dz: &[f64]) -> f64 {
        let (f, s) = self.unpack(z);
        let slacks = self.slacks(&f, s);
        let (df, ds) = if self.has_s() {
            let (mut df, ds) = self.unpack(dz);
            df[0] = 0.0;
            (df, ds)
        } else {
            let mut df = vec![0.0];
            df.extend_from_slice(dz);
            (df, 0.0)
        };
        let mut t = f64::INFINITY;
        for (&(i, j, d), slack) in self.pairs.iter().zip(slacks) {
            let rate = ds * d - df[i] + df[j];
            if rate < 0.0 {
                t = t.min(-slack / rate);
            }
        }
        t
    }
}

struct Centering {
    steps: usize,
    decrement: f64,
}

fn center(lifted: &Lifted, z: &mut Vec<f64>, tau: f64, max_steps: usize) -> Centering {
    let mut steps = 0;
    let mut decrement = f64::INFINITY;
    let mut value = lifted.value(z, tau);
    while steps < max_steps {
        let Some((dz, dec)) = lifted.newton_step(z, tau) else {
            break;
        };
        decrement = dec;
        if !(dec > 0.0) || dec / 2.0 <= CENTERED {
            decrement = dec.max(0.0);
            break;
        }
        steps += 1;
        let mut t = (0.99 * lifted.max_step(z, &dz)).min(1.0);
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = z.iter().zip(&dz).map(|(a, b)| a + t * b).collect();
            let v = lifted.value(&trial, tau);
            if v <= value - 0.25 * t * dec {
                *z = trial;
                value = v;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || z.iter().any(|v| v.abs() > DIVERGED) {
            break;
        }
    }
    Centering { steps, decrement }
}

fn barrier(pb: &Problem, cfg: &MYConfig) -> Result<MYResult> {
    let lifted = Lifted::new(pb, cfg);
    let mut z = vec![0.0; lifted.dim()];
    if lifted.has_s() {
        z[pb.n() - 1] = 1.0;
    }
    let constraints = lifted.pairs.len() as f64;
    let mut tau = TAU_START;
    let mut iterations = 0;
    let mut last;
    loop {
        last = center(&lifted, &mut z, tau, cfg.max_newton);
        iterations += last.steps;
        if constraints * tau <= cfg.tol || z.iter().any(|v| v.abs() > DIVERGED) {
            break;
        }
        tau *= TAU_FACTOR;
    }
    let (f, _) = lifted.unpack(&z);
    let value = pb.dual_objective(&f, &cfg.conjugate)?;
    let bounded = z.iter().all(|v| v.abs() <= DIVERGED);
    Ok(MYResult {
        value,
        xi_star: None,
        f_star: Some(f),
        converged: bounded && last.decrement / 2.0 <= 1e-8,
        iterations,
        gap_estimate: constraints * tau,
        method: "barrier".into(),
        experimental: false,
    })
}

/// Fixed-step gradient ascent with a subgradient of the Lipschitz norm
/// (`α > 1`, `α = ∞`) or the Pasch–Hausdorff envelope after each step
/// (`α = 1`). Keeps the best iterate.
fn ascent(pb: &Problem, cfg: &MYConfig) -> Result<MYResult> {
    let n = pb.n();
    let lambda = pb.params.lambda;
    let mut f = vec![0.0; n];
    let mut best = (pb.dual_objective(&f, &cfg.conjugate)?, f.clone());
    let slope_penalty = |l: f64| -> f64 {
        match pb.params.alpha {
            Alpha::Infinite => pb.params.beta.unwrap_or(0.0),
            Alpha::Finite(1.0) => 0.0,
            Alpha::Finite(a) => {
                let (c, q) = power_penalty(lambda, a);
                c * q * l.powf(q - 1.0)
            }
        }
    };
    for _ in 0..cfg.ascent_iters {
        let conj = conjugate_unchecked(pb.spec, &f, pb.nu, &cfg.conjugate)?;
        let l = lipschitz_norm(pb.space, &f);
        let pen = slope_penalty(l);
        let sub = lipschitz_subgradient(pb.space, &f);
        for i in 0..n {
            f[i] += cfg.learning_rate * (pb.mu[i] - conj.gradient[i] - pen * sub[i]);
        }
        if pb.params.alpha == Alpha::Finite(1.0) {
            f = lipschitz_envelope(pb.space, &f, lambda);
        }
        let f0 = f[0];
        f.iter_mut().for_each(|v| *v -= f0);
        let v = pb.dual_objective(&f, &cfg.conjugate)?;
        if v > best.0 {
            best = (v, f.clone());
        }
    }
    Ok(MYResult {
        value: best.0,
        xi_star: None,
        f_star: Some(best.1),
        converged: true,
        iterations: cfg.ascent_iters,
        gap_estimate: f64::NAN,
        method: "ascent".into(),
        experimental: false,
    })
}
