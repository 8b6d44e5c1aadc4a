//! Dense vector/matrix aliases and the handful of small linear-algebra
//! routines the controllers need.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// A point of the state space.
pub type State = DVector<f64>;
/// A dense real matrix.
pub type Matrix = DMatrix<f64>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `x' M y`.
pub fn quadratic_form(m: &Matrix, x: &State, y: &State) -> f64 {
    x.dot(&(m * y))
}

/// Induced 2-norm of a symmetric matrix (largest absolute eigenvalue).
pub fn symmetric_norm(m: &Matrix) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Maximum absolute row sum, `max_i sum_j |a_ij|`.
pub fn max_row_sum(m: &Matrix) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves the Lyapunov equation `A' P + P A = -Q` by vectorization.
///
/// The result is symmetrized. Sizes up to a few dozen are fine; the
/// Kronecker system has `n^2` unknowns.
pub fn solve_lyapunov(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    check_dim(n, a.ncols())?;
    check_dim(n, q.nrows())?;
    check_dim(n, q.ncols())?;
    let nn = n * n;
    // Column-major vec: vec(A' P + P A) = (I (x) A' + A' (x) I) vec(P).
    let mut k = Matrix::zeros(nn, nn);
    for col in 0..n {
        for row in 0..n {
            let eq = col * n + row;
            for m in 0..n {
                // (A' P)[row, col] = sum_m A[m, row] P[m, col]
                k[(eq, col * n + m)] += a[(m, row)];
                // (P A)[row, col] = sum_m P[row, m] A[m, col]
                k[(eq, m * n + row)] += a[(m, col)];
            }
        }
    }
    let rhs = State::from_iterator(nn, q.iter().map(|v| -v));
    let sol = k.lu().solve(&rhs).ok_or(Error::Singular)?;
    let p = Matrix::from_column_slice(n, n, sol.as_slice());
    Ok((&p + p.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lyapunov_solution_satisfies_equation() {
        let a = Matrix::from_row_slice(2, 2, &[-1.0, 2.0, -3.0, -4.0]);
        let q = Matrix::identity(2, 2);
        let p = solve_lyapunov(&a, &q).unwrap();
        let lhs = a.transpose() * &p + &p * &a;
        assert!((lhs + q).norm() < 1e-12);
        assert!(p.clone().symmetric_eigenvalues().iter().all(|&e| e > 0.0));
    }

    #[test]
    fn row_sum_norm() {
        let a = Matrix::from_row_slice(2, 2, &[0.25, -0.25, 0.5, 0.5]);
        assert_eq!(max_row_sum(&a), 1.0);
        assert_eq!(max_row_sum(&Matrix::zeros(3, 3)), 0.0);
    }

    #[test]
    fn symmetric_norm_picks_largest_magnitude() {
        let m = Matrix::from_row_slice(2, 2, &[-3.0, 0.0, 0.0, 2.0]);
        assert!((symmetric_norm(&m) - 3.0).abs() < 1e-14);
    }
}
