//! Transfer functions, model spectra and Granger-causality spectra of
//! fitted VAR models.
//!
//! Conventions: `P(ω) = (I - Σ_j A_j e^{-ijω})^{-1}` and
//! `h(ω) = P(ω) Σ P(ω)^*` with no `2π` factor. Frequencies on a
//! [`FrequencyGrid`] are in cycles per sample; angular frequency is `2πf`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complex_inverse, median, RCOND_TOL};
use crate::series::MultiSeries;
use crate::var::{fit_var, fit_var_from, select_lag_bic, VarModel};

/// Negative causality values down to `-CLAMP_TOL` are rounding noise and are
/// clamped to zero; anything lower is reported as an inconsistency.
pub const CLAMP_TOL: f64 = 1e-10;

/// Variance floor below which an innovation variance counts as degenerate.
pub const VARIANCE_FLOOR: f64 = 1e-14;

/// Fourier frequencies `f_i = i / M`, `i = 1..=floor(M/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    base: usize,
    frequencies: Vec<f64>,
}

impl FrequencyGrid {
    pub fn fourier(base: usize) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidInput(format!(
                "frequency grid base must be at least 2, got {base}"
            )));
        }
        let frequencies = (1..=base / 2).map(|i| i as f64 / base as f64).collect();
        Ok(Self { base, frequencies })
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Frequencies in cycles per sample.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn omega(&self, i: usize) -> f64 {
        2.0 * PI * self.frequencies[i]
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.omega(i)).collect()
    }
}

/// The causality functional under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    /// `h_{Y→X}(ω)`.
    Unconditional,
    /// `h_{Y→X|W}(ω)`.
    Conditional,
    /// `h_{Y→X}(ω) - h_{Y→X|W}(ω)`.
    Difference,
}

impl Functional {
    pub fn needs_conditioning(self) -> bool {
        !matches!(self, Functional::Unconditional)
    }

    /// Lag orders carried by this functional: `[XY]`, `[XW, XYW]` or
    /// `[XY, XW, XYW]`.
    pub fn n_models(self) -> usize {
        match self {
            Functional::Unconditional => 1,
            Functional::Conditional => 2,
            Functional::Difference => 3,
        }
    }
}

impl std::fmt::Display for Functional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Functional::Unconditional => "unconditional",
            Functional::Conditional => "conditional",
            Functional::Difference => "difference",
        })
    }
}

impl std::str::FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unconditional" => Ok(Functional::Unconditional),
            "conditional" => Ok(Functional::Conditional),
            "difference" => Ok(Functional::Difference),
            other => Err(Error::Config(format!("unknown functional '{other}'"))),
        }
    }
}

/// One causality (or difference) value per grid frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub grid: FrequencyGrid,
    pub values: Vec<f64>,
    pub kind: Functional,
    /// Lag orders of the fitted models, in the order given by
    /// [`Functional::n_models`].
    pub lag_orders: Vec<usize>,
}

impl SpectrumResult {
    pub fn median(&self) -> f64 {
        median(&self.values)
    }
}

/// `(I - Σ_j A_j e^{-ijω})`.
fn lag_polynomial(model: &VarModel, omega: f64) -> DMatrix<Complex64> {
    let p = model.n_series();
    let mut m = DMatrix::<Complex64>::identity(p, p);
    for (j, a) in model.coefs().iter().enumerate() {
        let z = Complex64::from_polar(1.0, -((j + 1) as f64) * omega);
        for r in 0..p {
            for c in 0..p {
                m[(r, c)] -= z * a[(r, c)];
            }
        }
    }
    m
}

/// Transfer function `P(ω) = (I - Σ_j A_j e^{-ijω})^{-1}`.
pub fn transfer_function(model: &VarModel, omega: f64) -> Result<DMatrix<Complex64>> {
    complex_inverse(&lag_polynomial(model, omega)).ok_or(Error::SingularAtFrequency { omega })
}

/// Model spectrum `h(ω) = P(ω) Σ P(ω)^*`.
pub fn spectral_matrix(model: &VarModel, omega: f64) -> Result<DMatrix<Complex64>> {
    let p = transfer_function(model, omega)?;
    let sigma = model.sigma().map(|v| Complex64::new(v, 0.0));
    Ok(&p * sigma * p.adjoint())
}

/// Applies the nonnegativity contract to a raw causality value.
pub fn clamp_causality(value: f64, omega: f64) -> Result<f64> {
    if !value.is_finite() || value < -CLAMP_TOL {
        Err(Error::NumericalInconsistency { value, omega })
    } else {
        Ok(value.max(0.0))
    }
}

/// Which variables of a bivariate model play effect and cause.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Orientation {
    pub effect: usize,
    pub cause: usize,
}

impl Orientation {
    /// Effect is variable 0, cause is variable 1.
    pub const XY: Orientation = Orientation {
        effect: 0,
        cause: 1,
    };
}

/// `h_xx = Σ_{a,b} P_xa Σ_ab conj(P_xb)` for row `x` of `P`.
fn row_power(p: &DMatrix<Complex64>, row: usize, sigma: &DMatrix<f64>) -> f64 {
    let n = p.ncols();
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            acc += p[(row, a)] * sigma[(a, b)] * p[(row, b)].conj();
        }
    }
    acc.re
}

fn check_variance(v: f64, what: &str) -> Result<()> {
    if v > VARIANCE_FLOOR {
        Ok(())
    } else {
        Err(Error::DegenerateCovariance(format!(
            "{what} innovation variance {v:e} is not positive"
        )))
    }
}

/// Unconditional causality `h_{Y→X}(ω)` of a bivariate model.
///
/// With `Σ = [[σ, υ], [υ, γ]]` (effect first), the transfer function is
/// normalised so the effect innovation is orthogonal to the rotated cause
/// innovation: `P̃_xx = P_xx + (υ/σ) P_xy`. The value is
/// `ln(h_xx / (P̃_xx σ P̃_xx^*))`, which is zero when the cause lags carry
/// no information and nonnegative otherwise.
pub fn unconditional_gc(model: &VarModel, omega: f64, orientation: Orientation) -> Result<f64> {
    if model.n_series() != 2 {
        return Err(Error::InvalidInput(format!(
            "unconditional causality needs a bivariate model, got {} series",
            model.n_series()
        )));
    }
    let Orientation { effect, cause } = orientation;
    if effect > 1 || cause > 1 || effect == cause {
        return Err(Error::InvalidInput("orientation must name two distinct variables".into()));
    }
    let sigma = model.sigma();
    let (s, u, g) = (sigma[(effect, effect)], sigma[(effect, cause)], sigma[(cause, cause)]);
    check_variance(g, "cause")?;
    check_variance(s, "effect")?;

    let p = transfer_function(model, omega)?;
    let h_xx = row_power(&p, effect, sigma);
    let p_tilde = p[(effect, effect)] + p[(effect, cause)] * (u / s);
    let intrinsic = p_tilde.norm_sqr() * s;
    clamp_causality((h_xx / intrinsic).ln(), omega)
}

/// Conditional causality `h_{Y→X|W}(ω)`.
///
/// `xw` is a bivariate model on `[X, W]` and `xyw` a trivariate model on
/// `[X, Y, W]`, both fitted on the same sample window. `G(ω)` is the
/// normalised transfer function of `xw`, `C(ω)` embeds it around a unit
/// entry for `Y`, `Q(ω) = C(ω)^{-1} P'(ω)`, and
/// `h_{X*X*} = Σ_{v∈{X,Y,W}} |Q_Xv|² σ_vv` uses the diagonal of the
/// trivariate innovation covariance.
pub fn conditional_gc(xw: &VarModel, xyw: &VarModel, omega: f64) -> Result<f64> {
    if xw.n_series() != 2 || xyw.n_series() != 3 {
        return Err(Error::InvalidInput(
            "conditional causality needs an [X, W] and an [X, Y, W] model".into(),
        ));
    }
    if xw.sample_start() != xyw.sample_start() || xw.n_obs() != xyw.n_obs() {
        return Err(Error::MisalignedModels);
    }
    let s2 = xw.sigma();
    check_variance(s2[(0, 0)], "bivariate effect")?;
    check_variance(s2[(1, 1)], "bivariate conditioning")?;
    let s3 = xyw.sigma();
    for (i, what) in ["trivariate effect", "trivariate cause", "trivariate conditioning"]
        .iter()
        .enumerate()
    {
        check_variance(s3[(i, i)], what)?;
    }

    let g = transfer_function(xw, omega)?;
    let ratio = s2[(0, 1)] / s2[(0, 0)];
    let g_xx = g[(0, 0)] + g[(0, 1)] * ratio;
    let g_xw = g[(0, 1)];
    let g_wx = g[(1, 0)] + g[(1, 1)] * ratio;
    let g_ww = g[(1, 1)];

    // C^{-1} restricted to its X row, via the 2x2 [X, W] block.
    let det = g_xx * g_ww - g_xw * g_wx;
    let norm_c = (g_xx.norm() + g_wx.norm()).max(g_xw.norm() + g_ww.norm());
    let norm_inv = (g_ww.norm() + g_wx.norm()).max(g_xw.norm() + g_xx.norm()) / det.norm();
    let rcond = 1.0 / (norm_c * norm_inv);
    if !(rcond.is_finite() && rcond >= RCOND_TOL) {
        return Err(Error::SingularAtFrequency { omega });
    }
    let cinv_xx = g_ww / det;
    let cinv_xw = -g_xw / det;

    let p3 = transfer_function(xyw, omega)?;
    let q = |col: usize| cinv_xx * p3[(0, col)] + cinv_xw * p3[(2, col)];
    let (q_xx, q_xy, q_xw) = (q(0), q(1), q(2));
    let own = q_xx.norm_sqr() * s3[(0, 0)];
    let total = own + q_xy.norm_sqr() * s3[(1, 1)] + q_xw.norm_sqr() * s3[(2, 2)];
    clamp_causality((total / own).ln(), omega)
}

/// Lag-order policy when fitting the models behind a spectrum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagChoice {
    /// The same order for every model.
    Fixed(usize),
    /// One order per model, as listed by [`Functional::n_models`].
    PerModel(Vec<usize>),
    /// BIC over `1..=k_max`, independently for each model.
    Bic { k_max: usize },
}

/// Columns of the input panel playing each role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Roles {
    pub effect: usize,
    pub cause: usize,
    pub conditioning: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumConfig {
    pub functional: Functional,
    pub lag: LagChoice,
    pub with_intercept: bool,
    /// Grid base `M`; `None` means the sample length.
    pub grid_base: Option<usize>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            functional: Functional::Unconditional,
            lag: LagChoice::Bic { k_max: 4 },
            with_intercept: true,
            grid_base: None,
        }
    }
}

/// Fitted models behind one functional, on canonical `[X, Y, (W)]` data.
#[derive(Debug, Clone)]
pub(crate) struct FunctionalModels {
    xy: Option<VarModel>,
    cond: Option<(VarModel, VarModel)>,
    lag_orders: Vec<usize>,
}

fn resolve_order(lag: &LagChoice, slot: usize, data: &MultiSeries, intercept: bool) -> Result<usize> {
    match lag {
        LagChoice::Fixed(k) => Ok(*k),
        LagChoice::PerModel(ks) => ks.get(slot).copied().ok_or_else(|| {
            Error::InvalidInput(format!("no lag order given for model {slot}"))
        }),
        LagChoice::Bic { k_max } => Ok(select_lag_bic(data, *k_max, intercept)?.chosen_k),
    }
}

/// Fits the models a functional needs. `data` holds `[X, Y]` or `[X, Y, W]`.
pub(crate) fn fit_functional(
    data: &MultiSeries,
    functional: Functional,
    lag: &LagChoice,
    with_intercept: bool,
) -> Result<FunctionalModels> {
    let need = if functional.needs_conditioning() { 3 } else { 2 };
    if data.n_series() != need {
        return Err(Error::InvalidInput(format!(
            "{functional} causality needs {need} series, got {}",
            data.n_series()
        )));
    }
    let mut lag_orders = Vec::with_capacity(functional.n_models());
    let mut slot = 0;
    let xy = if functional != Functional::Conditional {
        let xy_data = data.select(&[0, 1])?;
        let k = resolve_order(lag, slot, &xy_data, with_intercept)?;
        slot += 1;
        lag_orders.push(k);
        Some(fit_var(&xy_data, k, with_intercept)?)
    } else {
        None
    };
    let cond = if functional.needs_conditioning() {
        let xw_data = data.select(&[0, 2])?;
        let k2 = resolve_order(lag, slot, &xw_data, with_intercept)?;
        let k3 = resolve_order(lag, slot + 1, data, with_intercept)?;
        lag_orders.extend([k2, k3]);
        let start = k2.max(k3);
        Some((
            fit_var_from(&xw_data, k2, with_intercept, start)?,
            fit_var_from(data, k3, with_intercept, start)?,
        ))
    } else {
        None
    };
    Ok(FunctionalModels {
        xy,
        cond,
        lag_orders,
    })
}

impl FunctionalModels {
    pub(crate) fn lag_orders(&self) -> &[usize] {
        &self.lag_orders
    }

    pub(crate) fn evaluate(&self, grid: &FrequencyGrid) -> Result<Vec<f64>> {
        (0..grid.len())
            .map(|i| {
                let omega = grid.omega(i);
                let u = match &self.xy {
                    Some(m) => unconditional_gc(m, omega, Orientation::XY)?,
                    None => 0.0,
                };
                match &self.cond {
                    Some((xw, xyw)) => {
                        let c = conditional_gc(xw, xyw, omega)?;
                        Ok(if self.xy.is_some() { u - c } else { c })
                    }
                    None => Ok(u),
                }
            })
            .collect()
    }
}

/// Reorders `data` into canonical `[effect, cause, (conditioning)]` columns.
pub(crate) fn canonical_panel(data: &MultiSeries, roles: &Roles, functional: Functional) -> Result<MultiSeries> {
    let mut idx = vec![roles.effect, roles.cause];
    if functional.needs_conditioning() {
        let w = roles.conditioning.ok_or_else(|| {
            Error::InvalidInput(format!("{functional} causality needs a conditioning series"))
        })?;
        idx.push(w);
    }
    data.select(&idx)
}

/// Fits the models for the requested functional and evaluates it over the
/// Fourier grid.
pub fn gc_spectrum(data: &MultiSeries, roles: &Roles, config: &SpectrumConfig) -> Result<SpectrumResult> {
    let panel = canonical_panel(data, roles, config.functional)?;
    let grid = FrequencyGrid::fourier(config.grid_base.unwrap_or(panel.len()))?;
    let models = fit_functional(&panel, config.functional, &config.lag, config.with_intercept)?;
    let values = models.evaluate(&grid)?;
    Ok(SpectrumResult {
        grid,
        values,
        kind: config.functional,
        lag_orders: models.lag_orders().to_vec(),
    })
}
