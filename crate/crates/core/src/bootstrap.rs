//! Stationary bootstrap and the median-based causality tests.
//!
//! Each replicate resamples every series independently, which destroys
//! cross-series dependence while keeping each series' own dynamics. The
//! median of the causality spectrum across frequencies is recorded per
//! replicate; its empirical quantiles are the test thresholds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::median;
use crate::series::MultiSeries;
use crate::spectra::{
    canonical_panel, fit_functional, FrequencyGrid, Functional, LagChoice, Roles, SpectrumResult,
};

/// Share of failed replicates above which a test aborts.
pub const MAX_FAILURE_SHARE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagPolicy {
    /// Orders chosen once on the observed data and reused by every replicate.
    FixedFromData,
    /// BIC re-run on every replicate.
    ReselectPerReplicate,
}

impl std::str::FromStr for LagPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed_from_data" | "fixed-from-data" | "fixed" => Ok(LagPolicy::FixedFromData),
            "reselect_per_replicate" | "reselect-per-replicate" | "reselect" => {
                Ok(LagPolicy::ReselectPerReplicate)
            }
            other => Err(Error::Config(format!("unknown lag policy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub n_boot: usize,
    pub alpha: f64,
    /// Mean block length `L`; `None` means `ceil(T^(1/3))`.
    pub block_length: Option<f64>,
    pub seed: u64,
    pub lag_policy: LagPolicy,
    pub k_max: usize,
    /// Overrides lag selection for the observed data and all replicates.
    pub fixed_lag: Option<usize>,
    pub with_intercept: bool,
    /// Frequency grid base; `None` means the sample length.
    pub grid_base: Option<usize>,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            n_boot: 1000,
            alpha: 0.05,
            block_length: None,
            seed: 0,
            lag_policy: LagPolicy::FixedFromData,
            k_max: 4,
            fixed_lag: None,
            with_intercept: true,
            grid_base: None,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.n_boot < 100 {
            return Err(Error::InvalidInput(format!(
                "at least 100 bootstrap replicates are required, got {}",
                self.n_boot
            )));
        }
        if let Some(l) = self.block_length {
            if !(l >= 1.0 && l.is_finite()) {
                return Err(Error::InvalidInput(format!("block length must be >= 1, got {l}")));
            }
        }
        if self.k_max == 0 || self.fixed_lag == Some(0) {
            return Err(Error::InvalidInput("lag orders must be positive".into()));
        }
        Ok(())
    }

    pub fn block_length_for(&self, len: usize) -> f64 {
        self.block_length.unwrap_or_else(|| default_block_length(len))
    }
}

/// `ceil(T^(1/3))`.
pub fn default_block_length(len: usize) -> f64 {
    (len as f64).cbrt().ceil().max(1.0)
}

/// Index sequence of one stationary-bootstrap resample of length `len`.
///
/// A block starts at a uniform position; each following index either starts
/// a new block (probability `1/L`) or advances by one, wrapping around.
pub fn stationary_bootstrap_indices<R: Rng + ?Sized>(len: usize, block_length: f64, rng: &mut R) -> Vec<usize> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    let p = 1.0 / block_length.max(1.0);
    let mut idx = rng.random_range(0..len);
    out.push(idx);
    for _ in 1..len {
        if rng.random::<f64>() < p {
            idx = rng.random_range(0..len);
        } else {
            idx = (idx + 1) % len;
        }
        out.push(idx);
    }
    out
}

/// One stationary-bootstrap resample of `series`.
pub fn stationary_bootstrap<R: Rng + ?Sized>(series: &[f64], block_length: f64, rng: &mut R) -> Vec<f64> {
    stationary_bootstrap_indices(series.len(), block_length, rng)
        .into_iter()
        .map(|i| series[i])
        .collect()
}

/// RNG for replicate `index` under `seed`: a dedicated ChaCha stream, so
/// replicates can run in any order or on any number of threads.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Order statistic `ceil(q n)` (1-based) of `samples`, without interpolation.
pub fn empirical_quantile(samples: &[f64], q: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidInput(format!("quantile level must lie in (0, 1), got {q}")));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let rank = ((q * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    Ok(v[rank - 1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Too few replicates to resolve the Bonferroni tail quantile.
    QuantileUnstable { n_boot: usize, recommended: usize },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::QuantileUnstable { n_boot, recommended } => write!(
                f,
                "{n_boot} bootstrap replicates under-resolve the Bonferroni quantile; at least {recommended} recommended"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// Observed causality (or difference) spectrum.
    pub spectrum: SpectrumResult,
    pub alpha: f64,
    pub q_upper: f64,
    /// Lower threshold; only for the two-sided difference test.
    pub q_lower: Option<f64>,
    pub flags: Vec<bool>,
    pub bonferroni_q_upper: f64,
    pub bonferroni_q_lower: Option<f64>,
    pub bonferroni_flags: Vec<bool>,
    pub overall_significant: bool,
    /// Bootstrap medians of the successful replicates, in replicate order.
    pub boot_medians: Vec<f64>,
    pub n_failed: usize,
    pub block_length: f64,
    pub warnings: Vec<Warning>,
}

impl TestResult {
    pub fn two_sided(&self) -> bool {
        self.spectrum.kind == Functional::Difference
    }

    /// Median of the bootstrap medians.
    pub fn boot_median(&self) -> f64 {
        median(&self.boot_medians)
    }
}

fn outside(value: f64, lower: Option<f64>, upper: f64) -> bool {
    value > upper || lower.is_some_and(|q| value < q)
}

/// Recomputes the Bonferroni thresholds and verdict for sample length `len`.
///
/// One-sided tests use the `1 - 2α/T` quantile; the difference test uses
/// `α/T` in each tail.
pub fn overall_bonferroni(mut result: TestResult, len: usize, alpha: f64) -> Result<TestResult> {
    if len == 0 {
        return Err(Error::InvalidInput("sample length must be positive".into()));
    }
    let level = 2.0 * alpha / len as f64;
    let (lower, upper) = if result.two_sided() {
        (
            Some(empirical_quantile(&result.boot_medians, level / 2.0)?),
            empirical_quantile(&result.boot_medians, 1.0 - level / 2.0)?,
        )
    } else {
        (None, empirical_quantile(&result.boot_medians, 1.0 - level)?)
    };
    result.bonferroni_q_lower = lower;
    result.bonferroni_q_upper = upper;
    result.bonferroni_flags = result
        .spectrum
        .values
        .iter()
        .map(|&v| outside(v, lower, upper))
        .collect();
    result.overall_significant = result.bonferroni_flags.iter().any(|&f| f);

    let recommended = (10.0 * len as f64 / (2.0 * alpha)).ceil() as usize;
    result
        .warnings
        .retain(|w| !matches!(w, Warning::QuantileUnstable { .. }));
    if result.boot_medians.len() < recommended {
        result.warnings.push(Warning::QuantileUnstable {
            n_boot: result.boot_medians.len(),
            recommended,
        });
    }
    Ok(result)
}

/// Runs the bootstrap test of `functional` on canonical `[X, Y, (W)]` data.
pub(crate) fn run_test(panel: &MultiSeries, functional: Functional, config: &BootstrapConfig) -> Result<TestResult> {
    config.validate()?;
    let len = panel.len();
    if len < 2 {
        return Err(Error::TooShort { len, min: 2 });
    }
    let grid = FrequencyGrid::fourier(config.grid_base.unwrap_or(len))?;
    let observed_lag = match config.fixed_lag {
        Some(k) => LagChoice::Fixed(k),
        None => LagChoice::Bic { k_max: config.k_max },
    };
    let observed = fit_functional(panel, functional, &observed_lag, config.with_intercept)?;
    let values = observed.evaluate(&grid)?;
    let replicate_lag = match (config.fixed_lag, config.lag_policy) {
        (Some(k), _) => LagChoice::Fixed(k),
        (None, LagPolicy::FixedFromData) => LagChoice::PerModel(observed.lag_orders().to_vec()),
        (None, LagPolicy::ReselectPerReplicate) => LagChoice::Bic { k_max: config.k_max },
    };
    let block_length = config.block_length_for(len);

    let replicate = |b: usize| -> Option<f64> {
        let mut rng = replicate_rng(config.seed, b as u64);
        let columns = panel
            .columns()
            .iter()
            .map(|c| stationary_bootstrap(c, block_length, &mut rng))
            .collect();
        let resampled = MultiSeries::from_columns(columns).ok()?;
        let models = fit_functional(&resampled, functional, &replicate_lag, config.with_intercept).ok()?;
        let values = models.evaluate(&grid).ok()?;
        Some(median(&values))
    };
    let outcomes: Vec<Option<f64>> = (0..config.n_boot).into_par_iter().map(replicate).collect();
    let boot_medians: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let n_failed = config.n_boot - boot_medians.len();
    if n_failed as f64 > MAX_FAILURE_SHARE * config.n_boot as f64 {
        return Err(Error::ReplicateFailure {
            failed: n_failed,
            total: config.n_boot,
        });
    }

    let alpha = config.alpha;
    let (q_lower, q_upper) = if functional == Functional::Difference {
        (
            Some(empirical_quantile(&boot_medians, alpha / 2.0)?),
            empirical_quantile(&boot_medians, 1.0 - alpha / 2.0)?,
        )
    } else {
        (None, empirical_quantile(&boot_medians, 1.0 - alpha)?)
    };
    let flags = values.iter().map(|&v| outside(v, q_lower, q_upper)).collect();
    let result = TestResult {
        spectrum: SpectrumResult {
            grid,
            values,
            kind: functional,
            lag_orders: observed.lag_orders().to_vec(),
        },
        alpha,
        q_upper,
        q_lower,
        flags,
        bonferroni_q_upper: f64::NAN,
        bonferroni_q_lower: None,
        bonferroni_flags: Vec::new(),
        overall_significant: false,
        boot_medians,
        n_failed,
        block_length,
        warnings: Vec::new(),
    };
    overall_bonferroni(result, len, alpha)
}

fn panel_of(columns: &[&[f64]]) -> Result<MultiSeries> {
    let names = ["x", "y", "w"][..columns.len()].iter().map(|s| s.to_string()).collect();
    MultiSeries::new(names, columns.iter().map(|c| c.to_vec()).collect())
}

/// Bootstrap test of the unconditional causality from `y` to `x`.
pub fn test_unconditional(x: &[f64], y: &[f64], config: &BootstrapConfig) -> Result<TestResult> {
    run_test(&panel_of(&[x, y])?, Functional::Unconditional, config)
}

/// Bootstrap test of the causality from `y` to `x` conditional on `w`.
pub fn test_conditional(x: &[f64], y: &[f64], w: &[f64], config: &BootstrapConfig) -> Result<TestResult> {
    run_test(&panel_of(&[x, y, w])?, Functional::Conditional, config)
}

/// Two-sided bootstrap test of unconditional minus conditional causality.
pub fn test_difference(x: &[f64], y: &[f64], w: &[f64], config: &BootstrapConfig) -> Result<TestResult> {
    run_test(&panel_of(&[x, y, w])?, Functional::Difference, config)
}

/// Bootstrap test on named roles of a wider panel.
pub fn test_roles(data: &MultiSeries, roles: &Roles, functional: Functional, config: &BootstrapConfig) -> Result<TestResult> {
    run_test(&canonical_panel(data, roles, functional)?, functional, config)
}
