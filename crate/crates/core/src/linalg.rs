//! Small dense linear-algebra helpers shared by the estimators.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reciprocal condition below which a system is declared singular.
pub const RCOND_TOL: f64 = 1e-12;

pub(crate) struct LeastSquares {
    /// `m × q` coefficient matrix (one column per response).
    pub coef: DMatrix<f64>,
    /// `n × q` residual matrix.
    pub residuals: DMatrix<f64>,
}

/// Multi-response least squares through the normal equations.
///
/// The Gram matrix is equilibrated to unit diagonal before its reciprocal
/// condition (ratio of extreme eigenvalues) is checked, so the check is
/// invariant to column scaling.
pub(crate) fn least_squares(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<LeastSquares> {
    let m = x.ncols();
    let gram = x.transpose() * x;
    let mut scale = Vec::with_capacity(m);
    for i in 0..m {
        let d = gram[(i, i)];
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::SingularRegressors { rcond: 0.0 });
        }
        scale.push(1.0 / d.sqrt());
    }
    let scaled = DMatrix::from_fn(m, m, |i, j| gram[(i, j)] * scale[i] * scale[j]);
    let eig = SymmetricEigen::new(scaled.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    let rcond = if max > 0.0 { min / max } else { 0.0 };
    if !(rcond >= RCOND_TOL) {
        return Err(Error::SingularRegressors { rcond: rcond.max(0.0) });
    }
    let chol = Cholesky::new(scaled).ok_or(Error::SingularRegressors { rcond })?;
    let mut rhs = x.transpose() * y;
    for i in 0..m {
        rhs.row_mut(i).scale_mut(scale[i]);
    }
    let mut coef = chol.solve(&rhs);
    for i in 0..m {
        coef.row_mut(i).scale_mut(scale[i]);
    }
    let residuals = y - x * &coef;
    Ok(LeastSquares { coef, residuals })
}

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse of a complex matrix, or `None` when its 1-norm reciprocal
/// condition falls below [`RCOND_TOL`].
pub(crate) fn complex_inverse(m: &DMatrix<Complex64>) -> Option<DMatrix<Complex64>> {
    let inv = m.clone().try_inverse()?;
    let rcond = 1.0 / (norm1(m) * norm1(&inv));
    if rcond.is_finite() && rcond >= RCOND_TOL {
        Some(inv)
    } else {
        None
    }
}

/// Median of a slice (mean of the two central order statistics for even length).
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
