//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Solves `A x = b` for symmetric positive (semi)definite `A` by Cholesky,
/// adding a growing ridge when the factorization fails.
pub(crate) fn spd_solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        return Some(ch.solve(b));
    }
    let scale = a.diagonal().iter().fold(1e-300_f64, |m, &d| m.max(d.abs()));
    let mut ridge = 1e-14 * scale;
    for _ in 0..12 {
        let mut shifted = a.clone();
        for i in 0..a.nrows() {
            shifted[(i, i)] += ridge;
        }
        if let Some(ch) = shifted.cholesky() {
            return Some(ch.solve(b));
        }
        ridge *= 100.0;
    }
    None
}

pub(crate) fn spd_solve_vec(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let m = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    spd_solve(a, &m).map(|x| DVector::from_column_slice(x.as_slice()))
}

/// `H = diag(d) + U Uᵀ` with `d > 0`, solved by the Woodbury identity.
pub(crate) struct DiagPlusLowRank {
    dinv: DVector<f64>,
    u: DMatrix<f64>,
    /// `I + Uᵀ D⁻¹ U`.
    core: DMatrix<f64>,
}

impl DiagPlusLowRank {
    pub(crate) fn new(diag: &[f64], u: DMatrix<f64>) -> Self {
        let dinv = DVector::from_iterator(diag.len(), diag.iter().map(|d| 1.0 / d));
        let mut scaled = u.clone();
        for (mut row, &di) in scaled.row_iter_mut().zip(dinv.iter()) {
            row *= di;
        }
        let mut core = u.transpose() * scaled;
        for i in 0..core.nrows() {
            core[(i, i)] += 1.0;
        }
        Self { dinv, u, core }
    }

    /// `H⁻¹ B` for each column of `B`.
    pub(crate) fn solve(&self, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
        let mut y = b.clone();
        for (mut row, &di) in y.row_iter_mut().zip(self.dinv.iter()) {
            row *= di;
        }
        if self.u.ncols() == 0 {
            return Some(y);
        }
        let t = self.u.transpose() * &y;
        let s = spd_solve(&self.core, &t)?;
        let mut corr = &self.u * s;
        for (mut row, &di) in corr.row_iter_mut().zip(self.dinv.iter()) {
            row *= di;
        }
        Some(y - corr)
    }
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn woodbury_matches_dense() {
        let diag = [1.0, 2.0, 0.5, 4.0];
        let u = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 0.5, 0.0, 2.0, -1.0, 1.0]);
        let dense = DMatrix::from_diagonal(&DVector::from_column_slice(&diag)) + &u * u.transpose();
        let b = DMatrix::from_row_slice(4, 1, &[1.0, -2.0, 0.5, 3.0]);
        let x = DiagPlusLowRank::new(&diag, u).solve(&b).unwrap();
        let r = dense * x - b;
        assert!(r.amax() < 1e-12);
    }

    #[test]
    fn ridge_rescues_semidefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_column_slice(&[1.0, 1.0]);
        let x = spd_solve_vec(&a, &b).unwrap();
        assert!((x[0] + x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        let p = project_simplex(&[2.0, 0.0, -1.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        for x in p {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }
}
