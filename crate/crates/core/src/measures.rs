//! Finite metric spaces, discrete measures on them, and exact f-divergences
//! including the singular part:
//!
//! ```text
//! D_φ(μ‖ν) = Σ_{νᵢ>0} φ₊(μᵢ/νᵢ) νᵢ + φ'(∞) μ_s(X)
//! ```
//!
//! where `μ_s` is the part of `μ` living outside the support of `ν`.

use serde::{Deserialize, Serialize};

use crate::catalog::GeneratorSpec;
use crate::error::{ensure_finite, ensure_same_len, ensure_simplex, Error, Result};

/// Tolerance on `Σw = 1` for probability measures.
pub const PROBABILITY_TOL: f64 = 1e-12;

/// Relative slack allowed in the triangle inequality and symmetry checks.
const METRIC_SLACK: f64 = 1e-12;

/// `n` points with a distance matrix satisfying the metric axioms.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
}

impl FiniteMetricSpace {
    /// Validates `dist` as a metric: square, symmetric, zero diagonal,
    /// positive off-diagonal, triangle inequality.
    pub fn new(dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMetric(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        let space = Self { n, dist: flat };
        space.check_axioms()?;
        Ok(space)
    }

    /// Euclidean distances between the given coordinates.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let dim = points[0].len();
        let mut dist = vec![vec![0.0; n]; n];
        for i in 0..n {
            if points[i].len() != dim {
                return Err(Error::InvalidMetric(format!(
                    "point {i} has dimension {}, expected {dim}",
                    points[i].len()
                )));
            }
            ensure_finite(&points[i])?;
            for j in 0..i {
                let d = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                dist[i][j] = d;
                dist[j][i] = d;
            }
        }
        Self::new(dist)
    }

    /// Points on the real line.
    pub fn line(coords: &[f64]) -> Result<Self> {
        let pts: Vec<Vec<f64>> = coords.iter().map(|&x| vec![x]).collect();
        Self::from_points(&pts)
    }

    /// Metric completion of a symmetric nonnegative weight matrix by
    /// shortest paths (Floyd–Warshall).
    pub fn shortest_path_closure(mut weights: Vec<Vec<f64>>) -> Result<Self> {
        let n = weights.len();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = weights[i][k] + weights[k][j];
                    if via < weights[i][j] {
                        weights[i][j] = via;
                    }
                }
            }
        }
        for (i, row) in weights.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        Self::new(weights)
    }

    fn check_axioms(&self) -> Result<()> {
        let n = self.n;
        let scale = self.dist.iter().fold(0.0_f64, |m, &d| m.max(d.abs()));
        let slack = METRIC_SLACK * scale.max(1.0);
        for i in 0..n {
            if self.d(i, i) != 0.0 {
                return Err(Error::InvalidMetric(format!("d({i},{i}) = {} != 0", self.d(i, i))));
            }
            for j in 0..n {
                let dij = self.d(i, j);
                if !dij.is_finite() {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) is not finite")));
                }
                if i != j && dij <= 0.0 {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) = {dij} must be > 0")));
                }
                if (dij - self.d(j, i)).abs() > slack {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) != d({j},{i})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.d(i, k) > self.d(i, j) + self.d(j, k) + slack {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails for ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Row-major distance matrix.
    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Same size and distances equal within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.n == other.n
            && self
                .dist
                .iter()
                .zip(&other.dist)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Nonnegative weights on the points of a finite space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiscreteMeasure {
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Any finite nonnegative weights.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        ensure_finite(&weights)?;
        if let Some((idx, &value)) = weights.iter().enumerate().find(|(_, &w)| w < 0.0) {
            return Err(Error::Negative { idx, value });
        }
        Ok(Self { weights })
    }

    /// Weights forming a probability vector (sum 1 within 1e-12).
    pub fn probability(weights: Vec<f64>) -> Result<Self> {
        ensure_simplex(&weights, PROBABILITY_TOL)?;
        Ok(Self { weights })
    }

    pub fn dirac(n: usize, at: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[at] = 1.0;
        Self { weights }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            weights: vec![0.0; n],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.mass() - 1.0).abs() <= PROBABILITY_TOL
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, _)| i)
    }
}

/// Splits `μ` into the part on `supp(ν)` and the part outside it.
pub fn lebesgue_decompose(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    ensure_same_len(mu.weights(), nu.weights())?;
    let (c, s): (Vec<f64>, Vec<f64>) = mu
        .weights()
        .iter()
        .zip(nu.weights())
        .map(|(&m, &n)| if n > 0.0 { (m, 0.0) } else { (0.0, m) })
        .unzip();
    Ok((DiscreteMeasure { weights: c }, DiscreteMeasure { weights: s }))
}

/// `D_φ(μ‖ν)` for probability measures.
pub fn exact_divergence(
    spec: &GeneratorSpec,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<f64> {
    ensure_same_len(mu.weights(), nu.weights())?;
    ensure_simplex(mu.weights(), PROBABILITY_TOL)?;
    ensure_simplex(nu.weights(), PROBABILITY_TOL)?;
    Ok(divergence(spec, mu.weights(), nu.weights()))
}

/// `D_φ(μ‖ν)` on raw weight vectors, without validation.
///
/// Atoms with `μᵢ = νᵢ = 0` contribute nothing. The trivial generator gives
/// `0` when the weights agree within 1e-12 and `+∞` otherwise.
pub fn divergence(spec: &GeneratorSpec, mu: &[f64], nu: &[f64]) -> f64 {
    if spec.is_trivial() {
        let same = mu.iter().zip(nu).all(|(a, b)| (a - b).abs() <= 1e-12);
        return if same { 0.0 } else { f64::INFINITY };
    }
    let mut total = 0.0;
    let mut singular = 0.0;
    for (&m, &n) in mu.iter().zip(nu) {
        if n > 0.0 {
            total += (spec.phi_plus)(m / n) * n;
        } else {
            singular += m;
        }
    }
    if singular > 0.0 {
        total += spec.phi_prime_inf * singular;
    }
    total
}

/// On-disk measure format. Exactly one of `points` (Euclidean coordinates)
/// or `dist` (explicit distance matrix) must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    #[serde(default)]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub dist: Option<Vec<Vec<f64>>>,
    pub weights: Vec<f64>,
}

impl MeasureFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("measure file: {e}")))
    }

    pub fn space(&self) -> Result<FiniteMetricSpace> {
        match (&self.points, &self.dist) {
            (Some(p), None) => FiniteMetricSpace::from_points(p),
            (None, Some(d)) => FiniteMetricSpace::new(d.clone()),
            (Some(_), Some(_)) => Err(Error::InvalidInput(
                "measure file has both `points` and `dist`".into(),
            )),
            (None, None) => Err(Error::InvalidInput(
                "measure file needs one of `points` or `dist`".into(),
            )),
        }
    }

    /// The space and the probability measure described by the file.
    pub fn into_parts(self) -> Result<(FiniteMetricSpace, DiscreteMeasure)> {
        let space = self.space()?;
        if space.len() != self.weights.len() {
            return Err(Error::LengthMismatch(space.len(), self.weights.len()));
        }
        let measure = DiscreteMeasure::probability(self.weights)?;
        Ok((space, measure))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{get_spec, Generator};

    fn pm(w: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::probability(w.to_vec()).unwrap()
    }

    #[test]
    fn metric_validation() {
        assert!(FiniteMetricSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
        assert!(FiniteMetricSpace::new(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(FiniteMetricSpace::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(FiniteMetricSpace::new(vec![vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        let bad_triangle = vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ];
        assert!(FiniteMetricSpace::new(bad_triangle.clone()).is_err());
        let fixed = FiniteMetricSpace::shortest_path_closure(bad_triangle).unwrap();
        assert_eq!(fixed.d(0, 2), 2.0);
        assert!(FiniteMetricSpace::line(&[0.0, 0.0]).is_err());
        let line = FiniteMetricSpace::line(&[0.0, 1.0, 3.0]).unwrap();
        assert_eq!(line.d(0, 2), 3.0);
    }

    #[test]
    fn decomposition_examples() {
        let (c, s) = lebesgue_decompose(&pm(&[0.5, 0.5]), &pm(&[1.0, 0.0])).unwrap();
        assert_eq!(c.weights(), &[0.5, 0.0]);
        assert_eq!(s.weights(), &[0.0, 0.5]);
        let mu = pm(&[0.3, 0.7]);
        let (c, s) = lebesgue_decompose(&mu, &mu).unwrap();
        assert_eq!(c, mu);
        assert_eq!(s.mass(), 0.0);
        let (c, s) = lebesgue_decompose(&pm(&[0.2, 0.3, 0.5]), &pm(&[0.0, 0.4, 0.6])).unwrap();
        assert_eq!(c.weights(), &[0.0, 0.3, 0.5]);
        assert_eq!(s.weights(), &[0.2, 0.0, 0.0]);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn divergence_examples() {
        let mu = pm(&[0.75, 0.25]);
        let nu = pm(&[0.5, 0.5]);
        let kl = exact_divergence(&get_spec("kl").unwrap(), &mu, &nu).unwrap();
        let expect = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert!((kl - expect).abs() < 1e-15);
        assert!((kl - 0.130812).abs() < 1e-6);
        let chi2 = exact_divergence(&get_spec("chi2").unwrap(), &mu, &nu).unwrap();
        assert!((chi2 - 0.25).abs() < 1e-15);
        let h = exact_divergence(&get_spec("squared_hellinger").unwrap(), &mu, &mu).unwrap();
        assert_eq!(h, 0.0);
        let rkl = exact_divergence(
            &get_spec("reverse_kl").unwrap(),
            &pm(&[0.5, 0.5]),
            &pm(&[1.0, 0.0]),
        )
        .unwrap();
        let expect = (0.5 - 1.0 - 0.5f64.ln()) + 0.5;
        assert!((rkl - expect).abs() < 1e-15);
        assert!((rkl - 0.69315).abs() < 1e-5);
    }

    #[test]
    fn singular_mass_with_infinite_slope() {
        let mu = pm(&[0.5, 0.5]);
        let nu = pm(&[1.0, 0.0]);
        for name in ["kl", "chi2", "jeffreys", "trivial"] {
            let v = exact_divergence(&get_spec(name).unwrap(), &mu, &nu).unwrap();
            assert_eq!(v, f64::INFINITY, "{name}");
        }
        let zero_atoms = exact_divergence(
            &get_spec("kl").unwrap(),
            &pm(&[0.5, 0.5, 0.0]),
            &pm(&[0.5, 0.5, 0.0]),
        )
        .unwrap();
        assert_eq!(zero_atoms, 0.0);
    }

    #[test]
    fn total_variation_is_l1() {
        let tv = get_spec("total_variation").unwrap();
        let mu = pm(&[0.2, 0.3, 0.5, 0.0]);
        let nu = pm(&[0.0, 0.4, 0.35, 0.25]);
        let l1: f64 = mu.weights().iter().zip(nu.weights()).map(|(a, b)| (a - b).abs()).sum();
        assert!((exact_divergence(&tv, &mu, &nu).unwrap() - l1).abs() < 1e-12);
    }

    #[test]
    fn trivial_divergence() {
        let t = Generator::Trivial.spec();
        assert_eq!(divergence(&t, &[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert_eq!(divergence(&t, &[0.5, 0.5], &[0.4, 0.6]), f64::INFINITY);
    }

    #[test]
    fn measure_file_formats() {
        let f = MeasureFile::from_json(r#"{"points": [[0.0], [1.0]], "weights": [0.4, 0.6]}"#).unwrap();
        let (space, m) = f.into_parts().unwrap();
        assert_eq!(space.d(0, 1), 1.0);
        assert_eq!(m.weights(), &[0.4, 0.6]);
        let f = MeasureFile::from_json(
            r#"{"points": null, "dist": [[0, 2], [2, 0]], "weights": [1, 0]}"#,
        )
        .unwrap();
        assert_eq!(f.space().unwrap().d(1, 0), 2.0);
        let both = MeasureFile::from_json(
            r#"{"points": [[0.0], [1.0]], "dist": [[0, 2], [2, 0]], "weights": [1, 0]}"#,
        )
        .unwrap();
        assert!(both.into_parts().is_err());
        let neither = MeasureFile::from_json(r#"{"weights": [1]}"#).unwrap();
        assert!(neither.into_parts().is_err());
        let unnormalized =
            MeasureFile::from_json(r#"{"points": [[0.0], [1.0]], "weights": [0.4, 0.7]}"#).unwrap();
        assert!(unnormalized.into_parts().is_err());
    }
}
