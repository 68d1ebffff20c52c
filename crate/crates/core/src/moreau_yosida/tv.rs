//! Total variation is itself a `W₁` distance, for the metric `2·[x ≠ y]`, so
//! its Moreau-Yosida approximation reduces to transport problems:
//!
//! ```text
//! D_{TV,λ,α}(μ‖ν) = max_{s ≥ 0} { W₁^{(s)}(μ, ν) − P(s) },   d⁽ˢ⁾ = min(s·d, 2),
//! ```
//!
//! a concave one-dimensional problem. For `α = 1` the maximizer is `s = λ`.

use super::{Alpha, Problem};
use crate::error::Result;
use crate::measures::FiniteMetricSpace;
use crate::transport::{kantorovich_potential, w1_plan};

const GOLDEN_ITERS: usize = 120;

fn truncated(space: &FiniteMetricSpace, s: f64) -> Result<FiniteMetricSpace> {
    let n = space.len();
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 0.0 } else { (s * space.d(i, j)).min(2.0) })
                .collect()
        })
        .collect();
    FiniteMetricSpace::new(rows)
}

fn profile(pb: &Problem, s: f64) -> Result<f64> {
    if s <= 0.0 {
        return Ok(0.0);
    }
    let plan = w1_plan(&truncated(pb.space, s)?, pb.mu, pb.nu)?;
    Ok(plan.cost)
}

/// Maximizing slope `s*`, the bracket around it and the optimal value.
pub(super) struct TvSolution {
    pub s: f64,
    pub value: f64,
    pub iterations: usize,
}

pub(super) fn solve(pb: &Problem) -> Result<TvSolution> {
    let objective = |s: f64| -> Result<f64> { Ok(profile(pb, s)? - pb.params.penalty(s)) };
    if pb.params.alpha == Alpha::Finite(1.0) {
        let s = pb.params.lambda;
        return Ok(TvSolution {
            s,
            value: profile(pb, s)?,
            iterations: 1,
        });
    }
    let n = pb.n();
    let mut d_min = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d_min = d_min.min(pb.space.d(i, j));
            }
        }
    }
    // Beyond 2/d_min every pair is truncated and the profile is flat.
    let (mut a, mut b) = (0.0, if d_min.is_finite() { 2.0 / d_min } else { 1.0 });
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    let mut iterations = 0;
    for _ in 0..GOLDEN_ITERS {
        iterations += 1;
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = objective(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = objective(x2)?;
        }
        if b - a <= 1e-14 * (1.0 + b) {
            break;
        }
    }
    let mut best = (0.0, objective(0.0)?);
    for s in [a, x1, x2, b] {
        let v = objective(s)?;
        if v > best.1 {
            best = (s, v);
        }
    }
    Ok(TvSolution {
        s: best.0,
        value: best.1.max(0.0),
        iterations,
    })
}

/// Primal point read off an optimal plan for `d⁽ˢ⁾`: mass moved along an
/// untruncated pair is transported, the rest stays where it is.
pub(super) fn primal_point(pb: &Problem, s: f64) -> Result<Vec<f64>> {
    let n = pb.n();
    if s <= 0.0 {
        return Ok(pb.mu.to_vec());
    }
    let plan = w1_plan(&truncated(pb.space, s)?, pb.mu, pb.nu)?;
    let mut xi = vec![0.0; n];
    for x in 0..n {
        for z in 0..n {
            let p = plan.get(x, z);
            if p > 0.0 {
                if s * pb.space.d(x, z) <= 2.0 {
                    xi[z] += p;
                } else {
                    xi[x] += p;
                }
            }
        }
    }
    Ok(xi)
}

/// Dual potential: a Kantorovich potential for `d⁽ˢ⁾`, which is
/// `s`-Lipschitz for `d` and has oscillation at most 2.
pub(super) fn dual_point(pb: &Problem, s: f64) -> Result<Vec<f64>> {
    if s <= 0.0 {
        return Ok(vec![0.0; pb.n()]);
    }
    Ok(kantorovich_potential(&truncated(pb.space, s)?, pb.mu, pb.nu)?.1)
}
