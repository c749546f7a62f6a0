//! Small dense linear-algebra helpers for symmetric positive definite
//! matrices: Cholesky factorization, triangular solves, and SPD inversion.
//!
//! The matrices here are feature-level covariances and precisions, so sizes
//! stay modest and a plain Cholesky is all we need.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Cholesky factorization `A = L L^T` for a symmetric positive definite `A`.
///
/// Returns the lower-triangular factor, or a numeric error when a pivot is
/// not strictly positive.
pub fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Numeric(format!(
            "cholesky: matrix is {}x{}, expected square",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(Error::Numeric(format!(
                        "cholesky: non-positive pivot {sum:.3e} at row {i}; matrix is not positive definite"
                    )));
                }
                l[[i, j]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Solves `L x = b` with `L` lower triangular.
pub fn solve_lower(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut x = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[[i, k]] * x[k];
        }
        x[i] = sum / l[[i, i]];
    }
    x
}

/// Solves `L^T x = b` with `L` lower triangular.
pub fn solve_upper_from_lower(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut sum = b[i];
        for k in (i + 1)..n {
            sum -= l[[k, i]] * x[k];
        }
        x[i] = sum / l[[i, i]];
    }
    x
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn spd_inverse(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let l = cholesky(a)?;
    let mut inv = Array2::<f64>::zeros((n, n));
    // Solve A x = e_i column by column.
    for i in 0..n {
        let mut e = Array1::<f64>::zeros(n);
        e[i] = 1.0;
        let y = solve_lower(&l, &e);
        let x = solve_upper_from_lower(&l, &y);
        for j in 0..n {
            inv[[j, i]] = x[j];
        }
    }
    // Symmetrize to remove round-off drift.
    let inv_t = inv.t().to_owned();
    Ok((&inv + &inv_t) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn cholesky_recovers_known_factor() {
        let a = array![[4.0, 2.0], [2.0, 3.0]];
        let l = cholesky(&a).unwrap();
        let recon = l.dot(&l.t());
        for (x, y) in recon.iter().zip(a.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn spd_inverse_times_matrix_is_identity() {
        let a = array![[2.0, 0.5, 0.0], [0.5, 1.5, 0.3], [0.0, 0.3, 1.0]];
        let inv = spd_inverse(&a).unwrap();
        let prod = a.dot(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(prod[[i, j]], expect, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(cholesky(&a).is_err());
    }

    #[test]
    fn triangular_solves_invert_each_other() {
        let a = array![[3.0, 1.0, 0.2], [1.0, 2.5, 0.4], [0.2, 0.4, 1.8]];
        let l = cholesky(&a).unwrap();
        let b = array![1.0, -2.0, 0.5];
        let y = solve_lower(&l, &b);
        let x = solve_upper_from_lower(&l, &y);
        let back = a.dot(&x);
        for (u, v) in back.iter().zip(b.iter()) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-10);
        }
    }
}
