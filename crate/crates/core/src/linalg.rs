//! Dense symmetric helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Whether a Cholesky factorization of `m` succeeds.
pub fn cholesky_succeeds(m: &DMatrix<f64>) -> bool {
    m.clone().cholesky().is_some()
}

/// Numerical rank from the singular values, relative to the largest.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_and_cholesky_agree_on_simple_cases() {
        let pd = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert!((min_eigenvalue(&pd) - 1.0).abs() < 1e-14);
        assert!(cholesky_succeeds(&pd));
        let indef = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((min_eigenvalue(&indef) + 1.0).abs() < 1e-14);
        assert!(!cholesky_succeeds(&indef));
    }

    #[test]
    fn rank_of_dependent_rows() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0]);
        assert_eq!(numerical_rank(&m, 1e-10), 2);
    }
}
