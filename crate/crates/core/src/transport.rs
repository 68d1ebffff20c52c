//! Wasserstein-1 on finite metric spaces.
//!
//! The primal transportation problem is solved exactly by the transportation
//! simplex (north-west corner start, MODI potentials, tree cycles), restricted
//! to the supports of the two marginals. A Kantorovich potential on the whole
//! space is then read off the optimal column potentials by a c-transform,
//! `f(x) = min_j (d(x, y_j) − v_j)`, which is 1-Lipschitz by construction.

use serde::Serialize;

use crate::error::{ensure_finite, ensure_same_len, Error, Result, SolveDiagnostics};
use crate::measures::{DiscreteMeasure, FiniteMetricSpace};

/// Tolerance on the difference of total masses.
pub const MASS_TOL: f64 = 1e-9;

/// Optimal coupling and its cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    /// Row-major `n × n` plan.
    pub pi: Vec<f64>,
    pub n: usize,
    pub cost: f64,
}

impl TransportPlan {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pi[i * self.n + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.pi.chunks(self.n).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for row in self.pi.chunks(self.n) {
            for (acc, &p) in s.iter_mut().zip(row) {
                *acc += p;
            }
        }
        s
    }
}

/// Result of the restricted transportation simplex.
struct Solution {
    rows: Vec<usize>,
    cols: Vec<usize>,
    cells: Vec<(usize, usize)>,
    flows: Vec<f64>,
    /// Column potentials on `cols`.
    v: Vec<f64>,
    cost: f64,
}

/// `W₁(μ, ν)` together with an optimal plan.
pub fn w1_primal(
    space: &FiniteMetricSpace,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<TransportPlan> {
    w1_plan(space, mu.weights(), nu.weights())
}

/// [`w1_primal`] on raw weight vectors of equal mass.
pub fn w1_plan(space: &FiniteMetricSpace, a: &[f64], b: &[f64]) -> Result<TransportPlan> {
    let sol = solve(space, a, b)?;
    let n = space.len();
    let mut pi = vec![0.0; n * n];
    for (&(r, s), &x) in sol.cells.iter().zip(&sol.flows) {
        pi[sol.rows[r] * n + sol.cols[s]] += x;
    }
    Ok(TransportPlan {
        pi,
        n,
        cost: sol.cost,
    })
}

/// Optimal transport cost only.
pub fn w1_distance(space: &FiniteMetricSpace, a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(solve(space, a, b)?.cost)
}

/// `(W₁(μ,ν), f)` with `f` a 1-Lipschitz maximizer of `⟨μ − ν, f⟩`,
/// normalized to `f(x₀) = 0`. Identical measures give the zero potential.
pub fn kantorovich_dual(
    space: &FiniteMetricSpace,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<(f64, Vec<f64>)> {
    kantorovich_potential(space, mu.weights(), nu.weights())
}

/// [`kantorovich_dual`] on raw weight vectors of equal mass.
pub fn kantorovich_potential(
    space: &FiniteMetricSpace,
    a: &[f64],
    b: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let n = space.len();
    if a.len() == n && a == b {
        check_marginals(space, a, b)?;
        return Ok((0.0, vec![0.0; n]));
    }
    let sol = solve(space, a, b)?;
    let mut f: Vec<f64> = (0..n)
        .map(|x| {
            sol.cols
                .iter()
                .zip(&sol.v)
                .map(|(&y, &vy)| space.d(x, y) - vy)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let f0 = f[0];
    for fi in &mut f {
        *fi -= f0;
    }
    Ok((sol.cost, f))
}

/// `max_{i≠j} |fᵢ − fⱼ| / dᵢⱼ`, zero on a single point.
pub fn lipschitz_norm(space: &FiniteMetricSpace, f: &[f64]) -> f64 {
    lipschitz_argmax(space, f).map_or(0.0, |(_, _, q)| q)
}

/// Lexicographically smallest pair `(i, j)`, `i < j`, attaining the
/// Lipschitz norm, and the norm itself.
pub fn lipschitz_argmax(space: &FiniteMetricSpace, f: &[f64]) -> Option<(usize, usize, f64)> {
    let n = space.len().min(f.len());
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let q = (f[i] - f[j]).abs() / space.d(i, j);
            if best.is_none_or(|(_, _, b)| q > b) {
                best = Some((i, j, q));
            }
        }
    }
    best
}

/// A subgradient of `f ↦ ‖f‖_L`, supported on the lexicographically
/// smallest argmax pair. Zero when `f` is constant.
pub fn lipschitz_subgradient(space: &FiniteMetricSpace, f: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; f.len()];
    if let Some((i, j, q)) = lipschitz_argmax(space, f) {
        if q > 0.0 {
            let s = (f[i] - f[j]).signum() / space.d(i, j);
            g[i] = s;
            g[j] = -s;
        }
    }
    g
}

/// Pasch–Hausdorff envelope `fᵢ ← min_j (fⱼ + λ dᵢⱼ)`: the greatest
/// `λ`-Lipschitz function below `f`. It is not a Euclidean projection.
pub fn lipschitz_envelope(space: &FiniteMetricSpace, f: &[f64], lambda: f64) -> Vec<f64> {
    (0..f.len())
        .map(|i| {
            f.iter()
                .enumerate()
                .map(|(j, &fj)| fj + lambda * space.d(i, j))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn check_marginals(space: &FiniteMetricSpace, a: &[f64], b: &[f64]) -> Result<()> {
    ensure_same_len(a, b)?;
    if a.len() != space.len() {
        return Err(Error::LengthMismatch(space.len(), a.len()));
    }
    ensure_finite(a)?;
    ensure_finite(b)?;
    for (idx, &value) in a.iter().chain(b).enumerate() {
        if value < 0.0 {
            return Err(Error::Negative {
                idx: idx % a.len(),
                value,
            });
        }
    }
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if (sa - sb).abs() > MASS_TOL {
        return Err(Error::InvalidInput(format!(
            "marginals have different mass: {sa} vs {sb}"
        )));
    }
    Ok(())
}

fn solve(space: &FiniteMetricSpace, a: &[f64], b: &[f64]) -> Result<Solution> {
    check_marginals(space, a, b)?;
    let rows: Vec<usize> = (0..a.len()).filter(|&i| a[i] > 0.0).collect();
    let cols: Vec<usize> = (0..b.len()).filter(|&j| b[j] > 0.0).collect();
    if rows.is_empty() || cols.is_empty() {
        return Ok(Solution {
            rows,
            cols: cols.clone(),
            cells: Vec::new(),
            flows: Vec::new(),
            v: vec![0.0; cols.len()],
            cost: 0.0,
        });
    }
    let supply: Vec<f64> = rows.iter().map(|&i| a[i]).collect();
    let demand: Vec<f64> = cols.iter().map(|&j| b[j]).collect();
    let (m, k) = (rows.len(), cols.len());
    let cost: Vec<f64> = rows
        .iter()
        .flat_map(|&i| cols.iter().map(move |&j| space.d(i, j)))
        .collect();
    let mut simplex = Simplex::north_west(m, k, &supply, &demand, cost);
    simplex.optimize()?;
    let (_, v) = simplex.potentials();
    let total = simplex
        .cells
        .iter()
        .zip(&simplex.flows)
        .map(|(&(r, s), &x)| x * simplex.c(r, s))
        .sum();
    Ok(Solution {
        rows,
        cols,
        cells: simplex.cells,
        flows: simplex.flows,
        v,
        cost: total,
    })
}

struct Simplex {
    m: usize,
    k: usize,
    cost: Vec<f64>,
    /// Basic cells; always `m + k − 1` of them, forming a spanning tree of
    /// the bipartite row/column graph.
    cells: Vec<(usize, usize)>,
    flows: Vec<f64>,
}

impl Simplex {
    fn north_west(m: usize, k: usize, supply: &[f64], demand: &[f64], cost: Vec<f64>) -> Self {
        let mut ra = supply.to_vec();
        let mut rb = demand.to_vec();
        let mut cells = Vec::with_capacity(m + k - 1);
        let mut flows = Vec::with_capacity(m + k - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let x = ra[i].min(rb[j]).max(0.0);
            cells.push((i, j));
            flows.push(x);
            ra[i] -= x;
            rb[j] -= x;
            if i == m - 1 && j == k - 1 {
                break;
            }
            if i == m - 1 {
                j += 1;
            } else if j == k - 1 || ra[i] <= rb[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self {
            m,
            k,
            cost,
            cells,
            flows,
        }
    }

    #[inline]
    fn c(&self, r: usize, s: usize) -> f64 {
        self.cost[r * self.k + s]
    }

    /// Tree adjacency over nodes `0..m` (rows) and `m..m+k` (columns);
    /// each entry is `(neighbour, cell index)`.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.m + self.k];
        for (idx, &(r, s)) in self.cells.iter().enumerate() {
            adj[r].push((self.m + s, idx));
            adj[self.m + s].push((r, idx));
        }
        adj
    }

    /// Dual potentials with `u₀ = 0` and `uᵣ + v_s = c_rs` on basic cells.
    fn potentials(&self) -> (Vec<f64>, Vec<f64>) {
        let adj = self.adjacency();
        let mut pot = vec![f64::NAN; self.m + self.k];
        pot[0] = 0.0;
        let mut stack = vec![0];
        while let Some(node) = stack.pop() {
            for &(next, idx) in &adj[node] {
                if pot[next].is_nan() {
                    let (r, s) = self.cells[idx];
                    pot[next] = self.c(r, s) - pot[node];
                    stack.push(next);
                }
            }
        }
        let v = pot.split_off(self.m);
        (pot, v)
    }

    /// Basic cells on the tree path from column node `s` to row node `r`,
    /// starting next to the column.
    fn tree_path(&self, r: usize, s: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.m + self.k];
        let mut seen = vec![false; self.m + self.k];
        seen[r] = true;
        let mut queue = std::collections::VecDeque::from([r]);
        let target = self.m + s;
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &(next, idx) in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    parent[next] = Some((node, idx));
                    queue.push_back(next);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = target;
        while let Some((prev, idx)) = parent[node] {
            path.push(idx);
            node = prev;
        }
        path
    }

    fn optimize(&mut self) -> Result<()> {
        let scale = self.cost.iter().fold(1.0_f64, |acc, &c| acc.max(c.abs()));
        let tol = 1e-12 * scale;
        let max_iter = 10_000 + 50 * self.m * self.k;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        for iter in 0..max_iter {
            let (u, v) = self.potentials();
            let mut entering: Option<(usize, usize, f64)> = None;
            'scan: for r in 0..self.m {
                for s in 0..self.k {
                    let red = self.c(r, s) - u[r] - v[s];
                    if red < -tol {
                        if bland {
                            entering = Some((r, s, red));
                            break 'scan;
                        }
                        if entering.is_none_or(|(_, _, best)| red < best) {
                            entering = Some((r, s, red));
                        }
                    }
                }
            }
            let Some((r, s, _)) = entering else {
                return Ok(());
            };
            let path = self.tree_path(r, s);
            // Path cells alternate −, +, −, ... starting next to the column.
            let mut leave: Option<(usize, f64)> = None;
            for (pos, &idx) in path.iter().enumerate() {
                if pos % 2 == 0 {
                    let x = self.flows[idx];
                    let better = match leave {
                        None => true,
                        Some((li, lx)) => {
                            x < lx || (x == lx && self.cells[idx] < self.cells[li])
                        }
                    };
                    if better {
                        leave = Some((idx, x));
                    }
                }
            }
            let Some((leave_idx, theta)) = leave else {
                return Err(Error::Solver {
                    message: "transportation simplex: basis is not a spanning tree".into(),
                    diagnostics: SolveDiagnostics {
                        iterations: iter,
                        last_value: f64::NAN,
                        residual: f64::NAN,
                    },
                });
            };
            let theta = theta.max(0.0);
            for (pos, &idx) in path.iter().enumerate() {
                if pos % 2 == 0 {
                    self.flows[idx] = (self.flows[idx] - theta).max(0.0);
                } else {
                    self.flows[idx] += theta;
                }
            }
            self.cells[leave_idx] = (r, s);
            self.flows[leave_idx] = theta;
            if theta == 0.0 {
                degenerate_run += 1;
                if degenerate_run > self.m + self.k {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
        }
        Err(Error::Solver {
            message: "transportation simplex did not terminate".into(),
            diagnostics: SolveDiagnostics {
                iterations: max_iter,
                last_value: f64::NAN,
                residual: f64::NAN,
            },
        })
    }
}
