//! Parametric F test of zero causality at a single frequency.
//!
//! In the effect equation with cause-lag coefficients `β_1..β_k`, zero
//! causality at `ω` is the pair of linear restrictions
//! `Σ β_j cos(jω) = 0` and `Σ β_j sin(jω) = 0`. At `ω ∈ {0, π}` the sine
//! restriction vanishes and only the cosine one remains.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::spectra::FrequencyGrid;

const SIN_EPS: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;

/// Degrees of freedom of one F statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Df {
    pub num: usize,
    pub den: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcResult {
    /// Angular frequencies tested.
    pub omegas: Vec<f64>,
    pub f_statistics: Vec<f64>,
    pub p_values: Vec<f64>,
    pub df: Vec<Df>,
    pub k: usize,
}

/// Survival function `P(F > x)` of the F distribution with `(d1, d2)`
/// degrees of freedom.
pub fn f_distribution_sf(x: f64, d1: f64, d2: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("F statistic must be nonnegative, got {x}")));
    }
    if !(d1 > 0.0 && d2 > 0.0 && d1.is_finite() && d2.is_finite()) {
        return Err(Error::Domain(format!("degrees of freedom must be positive, got ({d1}, {d2})")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let z = d2 / (d2 + d1 * x);
    statrs::function::beta::checked_beta_reg(d2 / 2.0, d1 / 2.0, z)
        .map(|p| p.clamp(0.0, 1.0))
        .map_err(|e| Error::Domain(e.to_string()))
}

fn is_endpoint(omega: f64) -> bool {
    omega.sin().abs() < SIN_EPS
}

/// Orthonormal basis of the null space of the restriction rows.
fn null_space(rows: &[Vec<f64>], k: usize, omega: f64) -> Result<Vec<DVector<f64>>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for row in rows {
        let mut v = DVector::from_column_slice(row);
        let scale = v.norm();
        for b in &basis {
            let c = b.dot(&v);
            v.axpy(-c, b, 1.0);
        }
        let n = v.norm();
        if !(n > RANK_TOL * scale) {
            return Err(Error::SingularRestriction { omega });
        }
        basis.push(v / n);
    }
    let r = basis.len();
    let mut null = Vec::with_capacity(k - r);
    for e in 0..k {
        let mut v = DVector::<f64>::zeros(k);
        v[e] = 1.0;
        for b in basis.iter().chain(null.iter()) {
            let c = b.dot(&v);
            v.axpy(-c, b, 1.0);
        }
        let n = v.norm();
        if n > 1e-8 {
            null.push(v / n);
        }
        if null.len() == k - r {
            break;
        }
    }
    Ok(null)
}

fn rss(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    Ok(least_squares(x, y)?.residuals.norm_squared())
}

/// Shared implementation; `w` adds unrestricted conditioning lags.
fn bc_at(x: &[f64], y: &[f64], w: Option<&[f64]>, k: usize, omegas: &[f64]) -> Result<BcResult> {
    let len = x.len();
    if y.len() != len || w.is_some_and(|w| w.len() != len) {
        return Err(Error::InvalidInput("series must have equal lengths".into()));
    }
    if k == 0 {
        return Err(Error::InvalidInput("lag order must be positive".into()));
    }
    if k < 2 && omegas.iter().any(|&o| !is_endpoint(o)) {
        return Err(Error::InsufficientLags { k });
    }
    for s in [x, y].into_iter().chain(w) {
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("series contain non-finite values".into()));
        }
    }
    let n = len.saturating_sub(k);
    let base_cols = 1 + k * if w.is_some() { 2 } else { 1 };
    if len <= 2 * k || n <= base_cols + k {
        return Err(Error::InsufficientData {
            observations: n,
            needed: base_cols + k,
        });
    }

    // Regressors: intercept, X lags, W lags (unrestricted); Y lags separately.
    let mut base = DMatrix::<f64>::zeros(n, base_cols);
    let mut ylags = DMatrix::<f64>::zeros(n, k);
    for t in 0..n {
        base[(t, 0)] = 1.0;
        for j in 0..k {
            base[(t, 1 + j)] = x[t + k - j - 1];
            if let Some(w) = w {
                base[(t, 1 + k + j)] = w[t + k - j - 1];
            }
            ylags[(t, j)] = y[t + k - j - 1];
        }
    }
    let target = DMatrix::from_column_slice(n, 1, &x[k..]);
    let full = DMatrix::from_fn(n, base_cols + k, |r, c| {
        if c < base_cols {
            base[(r, c)]
        } else {
            ylags[(r, c - base_cols)]
        }
    });
    let rss_u = rss(&full, &target)?;

    let mut result = BcResult {
        omegas: omegas.to_vec(),
        f_statistics: Vec::with_capacity(omegas.len()),
        p_values: Vec::with_capacity(omegas.len()),
        df: Vec::with_capacity(omegas.len()),
        k,
    };
    for &omega in omegas {
        let endpoint = is_endpoint(omega);
        let mut rows = vec![(1..=k).map(|j| (j as f64 * omega).cos()).collect::<Vec<_>>()];
        if !endpoint {
            rows.push((1..=k).map(|j| (j as f64 * omega).sin()).collect());
        }
        let r = rows.len();
        let null = null_space(&rows, k, omega)?;
        let mut restricted = DMatrix::<f64>::zeros(n, base_cols + null.len());
        restricted.columns_mut(0, base_cols).copy_from(&base);
        for (i, v) in null.iter().enumerate() {
            restricted.column_mut(base_cols + i).copy_from(&(&ylags * v));
        }
        let rss_r = rss(&restricted, &target)?;
        let den = if endpoint { len - k } else { len - 2 * k };
        let f = (((rss_r - rss_u) / r as f64) / (rss_u / den as f64)).max(0.0);
        result.f_statistics.push(f);
        result.p_values.push(f_distribution_sf(f, r as f64, den as f64)?);
        result.df.push(Df { num: r, den });
    }
    Ok(result)
}

/// Frequency-wise F test of zero causality from `y` to `x` in a VAR(k)
/// with intercept.
pub fn bc_test(x: &[f64], y: &[f64], k: usize, grid: &FrequencyGrid) -> Result<BcResult> {
    bc_at(x, y, None, k, &grid.omegas())
}

/// As [`bc_test`], with `k` unrestricted lags of `w` in the effect equation.
pub fn bc_test_conditional(x: &[f64], y: &[f64], w: &[f64], k: usize, grid: &FrequencyGrid) -> Result<BcResult> {
    bc_at(x, y, Some(w), k, &grid.omegas())
}

/// As [`bc_test`] / [`bc_test_conditional`] at arbitrary angular frequencies.
pub fn bc_test_at(x: &[f64], y: &[f64], w: Option<&[f64]>, k: usize, omegas: &[f64]) -> Result<BcResult> {
    bc_at(x, y, w, k, omegas)
}
