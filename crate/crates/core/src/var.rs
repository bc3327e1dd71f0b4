//! Vector autoregression: least-squares estimation, BIC lag selection,
//! companion-matrix stationarity and VAR(1) autocovariances.
//!
//! Every equation of a VAR shares the same lagged regressors, so the
//! seemingly-unrelated-regressions estimator reduces to equation-wise least
//! squares on one common regressor matrix. That is what [`fit_var`] does.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::series::MultiSeries;

/// Tolerance on the largest companion root modulus for stationarity.
pub const STATIONARITY_MARGIN: f64 = 1e-8;

/// A VAR(k) model `Z_t = c + A_1 Z_{t-1} + ... + A_k Z_{t-k} + e_t`,
/// either fitted to data or built from known parameters.
#[derive(Debug, Clone)]
pub struct VarModel {
    coefs: Vec<DMatrix<f64>>,
    intercept: Option<DVector<f64>>,
    sigma: DMatrix<f64>,
    residuals: DMatrix<f64>,
    /// Index of the first observation used as a regression target.
    sample_start: usize,
}

impl VarModel {
    /// Model with known coefficients and innovation covariance, no sample.
    pub fn from_parts(coefs: Vec<DMatrix<f64>>, sigma: DMatrix<f64>) -> Result<Self> {
        let p = sigma.nrows();
        if coefs.is_empty() {
            return Err(Error::InvalidInput("VAR needs at least one lag".into()));
        }
        if sigma.ncols() != p || p == 0 {
            return Err(Error::InvalidInput("innovation covariance must be square".into()));
        }
        if coefs.iter().any(|a| a.nrows() != p || a.ncols() != p) {
            return Err(Error::InvalidInput(format!(
                "every coefficient matrix must be {p}x{p}"
            )));
        }
        if (&sigma - sigma.transpose()).amax() > 1e-10 {
            return Err(Error::InvalidInput("innovation covariance is not symmetric".into()));
        }
        Ok(Self {
            coefs,
            intercept: None,
            sigma,
            residuals: DMatrix::zeros(0, p),
            sample_start: 0,
        })
    }

    pub fn lag_order(&self) -> usize {
        self.coefs.len()
    }

    pub fn n_series(&self) -> usize {
        self.sigma.nrows()
    }

    /// Coefficient matrices `A_1..A_k` (index 0 holds `A_1`).
    pub fn coefs(&self) -> &[DMatrix<f64>] {
        &self.coefs
    }

    pub fn intercept(&self) -> Option<&DVector<f64>> {
        self.intercept.as_ref()
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn residuals(&self) -> &DMatrix<f64> {
        &self.residuals
    }

    /// Number of regression targets, `T - start`.
    pub fn n_obs(&self) -> usize {
        self.residuals.nrows()
    }

    pub fn sample_start(&self) -> usize {
        self.sample_start
    }

    /// Same model with its variables reordered: new variable `i` is old
    /// variable `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let p = self.n_series();
        debug_assert_eq!(order.len(), p);
        let perm = |m: &DMatrix<f64>| DMatrix::from_fn(p, p, |i, j| m[(order[i], order[j])]);
        Self {
            coefs: self.coefs.iter().map(perm).collect(),
            intercept: self
                .intercept
                .as_ref()
                .map(|c| DVector::from_fn(p, |i, _| c[order[i]])),
            sigma: perm(&self.sigma),
            residuals: DMatrix::from_fn(self.residuals.nrows(), p, |t, j| {
                self.residuals[(t, order[j])]
            }),
            sample_start: self.sample_start,
        }
    }
}

/// Lagged regressor matrix for targets `start..T`: an optional leading column
/// of ones, then lag 1 of every series, lag 2 of every series, and so on.
pub(crate) fn lag_regressors(
    data: &MultiSeries,
    k: usize,
    with_intercept: bool,
    start: usize,
) -> DMatrix<f64> {
    let p = data.n_series();
    let n = data.len() - start;
    let off = usize::from(with_intercept);
    DMatrix::from_fn(n, off + p * k, |r, c| {
        if c < off {
            1.0
        } else {
            let c = c - off;
            let (lag, var) = (c / p + 1, c % p);
            data.at(start + r - lag, var)
        }
    })
}

fn check_not_constant(x: &DMatrix<f64>, from_col: usize) -> Result<()> {
    for col in x.column_iter().skip(from_col) {
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let mag = lo.abs().max(hi.abs());
        if hi - lo <= 1e-12 * mag || mag == 0.0 {
            return Err(Error::SingularRegressors { rcond: 0.0 });
        }
    }
    Ok(())
}

/// Fits a VAR(k) by least squares using every available target (`t = k..T`).
pub fn fit_var(data: &MultiSeries, k: usize, with_intercept: bool) -> Result<VarModel> {
    fit_var_from(data, k, with_intercept, k)
}

/// Fits a VAR(k) on targets `start..T` (`start >= k`).
///
/// Fitting several models on the same `start` makes their residual windows
/// identical, which the conditional spectrum and BIC comparisons need.
pub fn fit_var_from(
    data: &MultiSeries,
    k: usize,
    with_intercept: bool,
    start: usize,
) -> Result<VarModel> {
    if k == 0 {
        return Err(Error::InvalidInput("lag order must be at least 1".into()));
    }
    if start < k {
        return Err(Error::InvalidInput(format!(
            "sample start {start} precedes lag order {k}"
        )));
    }
    let p = data.n_series();
    let n = data.len().saturating_sub(start);
    let needed = p * k + 1;
    if n <= needed {
        return Err(Error::InsufficientData {
            observations: n,
            needed,
        });
    }
    let x = lag_regressors(data, k, with_intercept, start);
    let off = usize::from(with_intercept);
    check_not_constant(&x, off)?;
    let y = DMatrix::from_fn(n, p, |r, j| data.at(start + r, j));
    let ls = least_squares(&x, &y)?;

    let coefs = (0..k)
        .map(|lag| DMatrix::from_fn(p, p, |i, l| ls.coef[(off + lag * p + l, i)]))
        .collect();
    let intercept = with_intercept.then(|| DVector::from_fn(p, |i, _| ls.coef[(0, i)]));
    let mut sigma = ls.residuals.transpose() * &ls.residuals / n as f64;
    sigma = (&sigma + sigma.transpose()) * 0.5;

    Ok(VarModel {
        coefs,
        intercept,
        sigma,
        residuals: ls.residuals,
        sample_start: start,
    })
}

/// Outcome of BIC lag selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSelection {
    pub chosen_k: usize,
    pub bic_values: BTreeMap<usize, f64>,
    pub k_max: usize,
}

pub(crate) fn ln_det_spd(m: &DMatrix<f64>) -> Result<f64> {
    let chol = Cholesky::new(m.clone()).ok_or_else(|| {
        Error::DegenerateCovariance("residual covariance is not positive definite".into())
    })?;
    let l = chol.l_dirty();
    let ln_det = 2.0 * (0..m.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>();
    if ln_det.is_finite() {
        Ok(ln_det)
    } else {
        Err(Error::DegenerateCovariance(
            "residual covariance has zero determinant".into(),
        ))
    }
}

/// Chooses the lag order in `1..=k_max` minimising
/// `T_eff ln det(Sigma_k) + (p^2 k + p [intercept]) ln T_eff`.
///
/// Every candidate is fitted on the same window (targets `k_max..T`) so the
/// likelihoods are comparable. Ties go to the smaller order.
pub fn select_lag_bic(
    data: &MultiSeries,
    k_max: usize,
    with_intercept: bool,
) -> Result<LagSelection> {
    if k_max == 0 {
        return Err(Error::InvalidInput("k_max must be at least 1".into()));
    }
    let p = data.n_series();
    let mut bic_values = BTreeMap::new();
    let mut best: Option<(usize, f64)> = None;
    for k in 1..=k_max {
        let model = fit_var_from(data, k, with_intercept, k_max)?;
        let n = model.n_obs() as f64;
        let params = (p * p * k + if with_intercept { p } else { 0 }) as f64;
        let bic = n * ln_det_spd(model.sigma())? + params * n.ln();
        bic_values.insert(k, bic);
        if best.map_or(true, |(_, b)| bic < b) {
            best = Some((k, bic));
        }
    }
    Ok(LagSelection {
        chosen_k: best.map(|(k, _)| k).unwrap_or(1),
        bic_values,
        k_max,
    })
}

/// The `pk × pk` companion matrix of a VAR(k).
pub fn companion_matrix(model: &VarModel) -> DMatrix<f64> {
    let p = model.n_series();
    let k = model.lag_order();
    let mut c = DMatrix::zeros(p * k, p * k);
    for (j, a) in model.coefs().iter().enumerate() {
        c.view_mut((0, j * p), (p, p)).copy_from(a);
    }
    for i in p..p * k {
        c[(i, i - p)] = 1.0;
    }
    c
}

/// Moduli of the companion eigenvalues, in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompanionRoots {
    pub moduli: Vec<f64>,
}

impl CompanionRoots {
    pub fn largest(&self) -> f64 {
        self.moduli.first().copied().unwrap_or(0.0)
    }

    /// All roots strictly inside the unit circle (with a `1e-8` margin).
    pub fn is_stationary(&self) -> bool {
        self.largest() < 1.0 - STATIONARITY_MARGIN
    }
}

/// Roots of `det(I - sum_j A_j L^j) = 0`, reported as inverse-root moduli
/// (eigenvalue moduli of the companion matrix).
pub fn companion_roots(model: &VarModel) -> CompanionRoots {
    let eig = companion_matrix(model).complex_eigenvalues();
    let mut moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    CompanionRoots { moduli }
}

/// Autocovariances `R_j = cov(Z_t, Z_{t-j})` of a stationary VAR(1).
#[derive(Debug, Clone)]
pub struct Autocovariance {
    a: DMatrix<f64>,
    r0: DMatrix<f64>,
}

impl Autocovariance {
    pub fn r0(&self) -> &DMatrix<f64> {
        &self.r0
    }

    /// `R_j = A^j R_0`.
    pub fn at_lag(&self, lag: usize) -> DMatrix<f64> {
        let mut r = self.r0.clone();
        for _ in 0..lag {
            r = &self.a * r;
        }
        r
    }
}

/// Solves `vec(R_0) = (I - A ⊗ A)^{-1} vec(Sigma)` for a stationary VAR(1).
pub fn autocovariance_var1(model: &VarModel) -> Result<Autocovariance> {
    if model.lag_order() != 1 {
        return Err(Error::NotVar1 {
            k: model.lag_order(),
        });
    }
    let roots = companion_roots(model);
    if !roots.is_stationary() {
        return Err(Error::NonStationary {
            modulus: roots.largest(),
        });
    }
    let p = model.n_series();
    let a = model.coefs()[0].clone();
    let lhs = DMatrix::identity(p * p, p * p) - a.kronecker(&a);
    // Column-major storage makes `as_slice` the vec() operator.
    let rhs = DVector::from_column_slice(model.sigma().as_slice());
    let vec_r0 = lhs
        .lu()
        .solve(&rhs)
        .ok_or(Error::NonStationary {
            modulus: roots.largest(),
        })?;
    let r0 = DMatrix::from_column_slice(p, p, vec_r0.as_slice());
    let r0 = (&r0 + r0.transpose()) * 0.5;
    Ok(Autocovariance { a, r0 })
}
