//! Hodrick-Prescott trend extraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smoothing parameter conventionally used for quarterly data.
pub const QUARTERLY_LAMBDA: f64 = 1600.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpDecomposition {
    pub trend: Vec<f64>,
    pub cycle: Vec<f64>,
    pub lambda: f64,
}

/// Splits `series` into trend and cycle.
///
/// The trend solves `(I + λ D'D) τ = y`, `D` being the second-difference
/// operator; the system is pentadiagonal and is factored as `L D Lᵀ` with
/// two sub-diagonals.
pub fn hp_filter(series: &[f64], lambda: f64) -> Result<HpDecomposition> {
    let n = series.len();
    if n < 4 {
        return Err(Error::TooShort { len: n, min: 4 });
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("series contains non-finite values".into()));
    }

    // Bands of I + λ D'D: main diagonal, first and second super-diagonals.
    let mut d0 = vec![1.0; n];
    let mut d1 = vec![0.0; n - 1];
    let mut d2 = vec![0.0; n - 2];
    for i in 0..n - 2 {
        let c = [1.0, -2.0, 1.0];
        for a in 0..3 {
            d0[i + a] += lambda * c[a] * c[a];
        }
        d1[i] += lambda * c[0] * c[1];
        d1[i + 1] += lambda * c[1] * c[2];
        d2[i] += lambda * c[0] * c[2];
    }

    // L D Lᵀ: l1[j] = L[j+1][j], l2[j] = L[j+2][j].
    let mut d = vec![0.0; n];
    let mut l1 = vec![0.0; n];
    let mut l2 = vec![0.0; n];
    for j in 0..n {
        let mut dj = d0[j];
        if j >= 1 {
            dj -= l1[j - 1] * l1[j - 1] * d[j - 1];
        }
        if j >= 2 {
            dj -= l2[j - 2] * l2[j - 2] * d[j - 2];
        }
        d[j] = dj;
        if j + 1 < n {
            let mut v = d1[j];
            if j >= 1 {
                v -= l2[j - 1] * l1[j - 1] * d[j - 1];
            }
            l1[j] = v / dj;
        }
        if j + 2 < n {
            l2[j] = d2[j] / dj;
        }
    }

    let mut z = series.to_vec();
    for i in 1..n {
        z[i] -= l1[i - 1] * z[i - 1];
        if i >= 2 {
            z[i] -= l2[i - 2] * z[i - 2];
        }
    }
    for i in 0..n {
        z[i] /= d[i];
    }
    for i in (0..n).rev() {
        if i + 1 < n {
            z[i] -= l1[i] * z[i + 1];
        }
        if i + 2 < n {
            z[i] -= l2[i] * z[i + 2];
        }
    }

    let cycle = series.iter().zip(&z).map(|(y, t)| y - t).collect();
    Ok(HpDecomposition {
        trend: z,
        cycle,
        lambda,
    })
}
