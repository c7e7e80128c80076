//! Least squares through a Householder QR of the design matrix.

use nalgebra::{DMatrix, DVector};

/// Relative size below which a diagonal entry of `R` marks a collinear column.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub(crate) struct LeastSquares {
    pub coef: DVector<f64>,
    pub residuals: DVector<f64>,
    /// `(X'X)^-1`
    pub xtx_inv: DMatrix<f64>,
    pub ssr: f64,
}

/// Returns `None` when `x` has fewer rows than columns or is rank deficient.
pub(crate) fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<LeastSquares> {
    let (n, k) = x.shape();
    if n < k || k == 0 {
        return None;
    }
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..k {
        let col_norm = x.column(j).norm();
        if col_norm == 0.0 || r[(j, j)].abs() <= RANK_TOL * col_norm {
            return None;
        }
    }
    let qty = qr.q().transpose() * y;
    let coef = r.solve_upper_triangular(&qty)?;
    let r_inv = r.solve_upper_triangular(&DMatrix::identity(k, k))?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let residuals = y - x * &coef;
    let ssr = residuals.norm_squared();
    Some(LeastSquares {
        coef,
        residuals,
        xtx_inv,
        ssr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let y = DVector::from_vec(vec![1.0, 3.0, 5.0, 7.0]);
        let fit = least_squares(&x, &y).unwrap();
        assert!((fit.coef[0] - 1.0).abs() < 1e-12);
        assert!((fit.coef[1] - 2.0).abs() < 1e-12);
        assert!(fit.ssr < 1e-20);
        // (X'X)^-1 for x = 0..3 with intercept: [[7/10, -3/10], [-3/10, 1/5]]
        assert!((fit.xtx_inv[(0, 0)] - 0.7).abs() < 1e-12);
        assert!((fit.xtx_inv[(0, 1)] + 0.3).abs() < 1e-12);
        assert!((fit.xtx_inv[(1, 1)] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn collinear_columns_rejected() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(least_squares(&x, &y).is_none());
    }
}
