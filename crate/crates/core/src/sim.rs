//! Monte Carlo study of the bootstrap causality tests on known VAR designs.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bc::{bc_test, bc_test_conditional};
use crate::bootstrap::{run_test, BootstrapConfig, TestResult};
use crate::error::{Error, Result};
use crate::series::MultiSeries;
use crate::spectra::{FrequencyGrid, Functional};
use crate::var::{companion_roots, VarModel};

/// Paths with any value beyond this magnitude are rejected.
pub const EXPLOSION_LIMIT: f64 = 1e12;

pub const DEFAULT_T: usize = 200;
pub const DEFAULT_N_MC: usize = 100;
pub const DEFAULT_BURN_IN: usize = 200;
pub const MIN_N_MC: usize = 50;

/// A data-generating VAR with known parameters.
///
/// Matrices are row-major nested vectors; series are ordered
/// `[X (effect), Y (cause), W (conditioning)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDesign {
    pub name: String,
    pub k: usize,
    pub a: Vec<Vec<Vec<f64>>>,
    pub sigma: Vec<Vec<f64>>,
    #[serde(rename = "T")]
    pub t: usize,
    pub n_mc: usize,
    pub functional: Functional,
    pub burn_in: usize,
    /// Unit-root designs are allowed only when flagged.
    pub boundary: bool,
}

fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

impl SimDesign {
    pub fn n_series(&self) -> usize {
        self.sigma.len()
    }

    pub fn coef_matrices(&self) -> Vec<DMatrix<f64>> {
        self.a.iter().map(|m| to_matrix(m)).collect()
    }

    pub fn sigma_matrix(&self) -> DMatrix<f64> {
        to_matrix(&self.sigma)
    }

    /// The design as a model with its true parameters.
    pub fn true_model(&self) -> Result<VarModel> {
        VarModel::from_parts(self.coef_matrices(), self.sigma_matrix())
            .map_err(|e| Error::InvalidDesign(format!("{}: {e}", self.name)))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDesign(format!("{}: {msg}", self.name)));
        let p = self.n_series();
        if !(2..=3).contains(&p) {
            return bad(format!("designs have 2 or 3 series, got {p}"));
        }
        if self.sigma.iter().any(|r| r.len() != p) {
            return bad("sigma is not square".into());
        }
        if self.k == 0 || self.a.len() != self.k {
            return bad(format!("k = {} but {} coefficient matrices", self.k, self.a.len()));
        }
        if self.a.iter().any(|m| m.len() != p || m.iter().any(|r| r.len() != p)) {
            return bad(format!("coefficient matrices must be {p}x{p}"));
        }
        if self.functional.needs_conditioning() && p != 3 {
            return bad(format!("{} causality needs three series", self.functional));
        }
        if self.n_mc < MIN_N_MC {
            return bad(format!("n_mc must be at least {MIN_N_MC}, got {}", self.n_mc));
        }
        if self.t < 20 {
            return bad(format!("T must be at least 20, got {}", self.t));
        }
        let sigma = self.sigma_matrix();
        if (&sigma - sigma.transpose()).amax() > 1e-12 || Cholesky::new(sigma).is_none() {
            return bad("sigma must be symmetric positive definite".into());
        }
        let model = self.true_model()?;
        let roots = companion_roots(&model);
        if !self.boundary && !roots.is_stationary() {
            return bad(format!(
                "largest root modulus {} but the design is not flagged as boundary",
                roots.largest()
            ));
        }
        Ok(())
    }
}

/// Simulates `T` observations after discarding `burn_in` from a zero start.
pub fn simulate_var(design: &SimDesign, seed: u64) -> Result<MultiSeries> {
    design.validate()?;
    let p = design.n_series();
    let a = design.coef_matrices();
    let chol = Cholesky::new(design.sigma_matrix())
        .ok_or_else(|| Error::InvalidDesign("sigma is not positive definite".into()))?;
    let l = chol.l();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = design.burn_in + design.t;
    let mut path: Vec<DVector<f64>> = Vec::with_capacity(total);
    for step in 0..total {
        let z = DVector::from_fn(p, |_, _| StandardNormal.sample(&mut rng));
        let mut x = &l * z;
        for (j, aj) in a.iter().enumerate() {
            if step > j {
                x += aj * &path[step - j - 1];
            }
        }
        if x.iter().any(|v| !(v.abs() <= EXPLOSION_LIMIT)) {
            return Err(Error::ExplodingPath { step });
        }
        path.push(x);
    }
    let columns = (0..p)
        .map(|j| path[design.burn_in..].iter().map(|x| x[j]).collect())
        .collect();
    let names = ["x", "y", "w"][..p].iter().map(|s| s.to_string()).collect();
    MultiSeries::new(names, columns)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Bootstrap settings; its seed is replaced by per-trial seeds.
    pub bootstrap: BootstrapConfig,
    pub seed: u64,
    /// Also run the parametric F test (when the fitted order is at least 2).
    pub bc: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            bootstrap: BootstrapConfig {
                n_boot: 500,
                ..BootstrapConfig::default()
            },
            seed: 0,
            bc: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub design: SimDesign,
    pub frequencies: Vec<f64>,
    pub rejection_rate: Vec<f64>,
    pub prominence_rate: Vec<f64>,
    pub degree_of_prominence: Vec<f64>,
    pub overall_bonferroni_rate: f64,
    /// Rejection rate of the F test at level alpha, over trials whose
    /// fitted order allowed it.
    pub bc_rejection_rate: Option<Vec<f64>>,
    pub bc_trials: usize,
    pub n_trials: usize,
    pub n_failed: usize,
    pub seed: u64,
    /// `(data seed, bootstrap seed)` of every trial.
    pub trial_seeds: Vec<(u64, u64)>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Data and bootstrap seeds of trial `index`.
pub fn trial_seeds(seed: u64, index: usize) -> (u64, u64) {
    let base = splitmix(seed ^ splitmix(index as u64));
    (splitmix(base), splitmix(base ^ 0xA5A5_A5A5_A5A5_A5A5))
}

struct Trial {
    test: TestResult,
    bc_flags: Option<Vec<bool>>,
}

fn run_trial(design: &SimDesign, config: &SimConfig, seeds: (u64, u64)) -> Result<Trial> {
    let data = simulate_var(design, seeds.0)?;
    let panel = if design.functional.needs_conditioning() {
        data
    } else {
        data.select(&[0, 1])?
    };
    let boot = BootstrapConfig {
        seed: seeds.1,
        ..config.bootstrap.clone()
    };
    let test = run_test(&panel, design.functional, &boot)?;
    let bc_flags = if config.bc && design.functional != Functional::Difference {
        let k = *test.spectrum.lag_orders.last().unwrap_or(&0);
        if k >= 2 {
            let r = match design.functional {
                Functional::Conditional => {
                    bc_test_conditional(panel.column(0), panel.column(1), panel.column(2), k, &test.spectrum.grid)
                }
                _ => bc_test(panel.column(0), panel.column(1), k, &test.spectrum.grid),
            }?;
            Some(r.p_values.iter().map(|&p| p < boot.alpha).collect())
        } else {
            None
        }
    } else {
        None
    };
    Ok(Trial { test, bc_flags })
}

fn share(trials: &[&Trial], f: impl Fn(&Trial) -> bool) -> f64 {
    trials.iter().filter(|t| f(t)).count() as f64 / trials.len() as f64
}

/// Runs all trials of `design` and aggregates the rate curves.
pub fn run_design(design: &SimDesign, config: &SimConfig) -> Result<SimReport> {
    design.validate()?;
    config.bootstrap.validate()?;
    let seeds: Vec<(u64, u64)> = (0..design.n_mc).map(|i| trial_seeds(config.seed, i)).collect();
    let outcomes: Vec<Result<Trial>> = seeds
        .par_iter()
        .map(|&s| run_trial(design, config, s))
        .collect();
    let n_failed = outcomes.iter().filter(|o| o.is_err()).count();
    if n_failed as f64 > 0.10 * design.n_mc as f64 {
        let first = outcomes
            .iter()
            .find_map(|o| o.as_ref().err())
            .map(|e| e.to_string())
            .unwrap_or_default();
        return Err(Error::TrialFailure {
            failed: n_failed,
            total: design.n_mc,
            first,
        });
    }
    let trials: Vec<&Trial> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let grid = FrequencyGrid::fourier(config.bootstrap.grid_base.unwrap_or(design.t))?;
    let nf = grid.len();

    let rejection_rate = (0..nf).map(|i| share(&trials, |t| t.test.flags[i])).collect();
    let prominence_rate = (0..nf)
        .map(|i| share(&trials, |t| t.test.spectrum.values[i] > t.test.q_upper))
        .collect();
    let degree_of_prominence = (0..nf)
        .map(|i| share(&trials, |t| t.test.spectrum.values[i] > t.test.boot_median()))
        .collect();
    let overall_bonferroni_rate = share(&trials, |t| t.test.overall_significant);

    let bc_runs: Vec<&Vec<bool>> = trials.iter().filter_map(|t| t.bc_flags.as_ref()).collect();
    let bc_rejection_rate = (!bc_runs.is_empty()).then(|| {
        (0..nf)
            .map(|i| bc_runs.iter().filter(|f| f[i]).count() as f64 / bc_runs.len() as f64)
            .collect()
    });

    Ok(SimReport {
        design: design.clone(),
        frequencies: grid.frequencies().to_vec(),
        rejection_rate,
        prominence_rate,
        degree_of_prominence,
        overall_bonferroni_rate,
        bc_rejection_rate,
        bc_trials: bc_runs.len(),
        n_trials: trials.len(),
        n_failed,
        seed: config.seed,
        trial_seeds: seeds,
    })
}

fn fmt_coef(v: f64) -> String {
    format!("{v}")
}

fn design(name: String, a: Vec<Vec<Vec<f64>>>, sigma: Vec<Vec<f64>>, functional: Functional, boundary: bool) -> SimDesign {
    SimDesign {
        name,
        k: a.len(),
        a,
        sigma,
        t: DEFAULT_T,
        n_mc: DEFAULT_N_MC,
        functional,
        burn_in: DEFAULT_BURN_IN,
        boundary,
    }
}

fn identity(p: usize) -> Vec<Vec<f64>> {
    (0..p)
        .map(|i| (0..p).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Lag-3 design whose causality from Y to X vanishes exactly at `omega_star`.
pub fn breitung_design(omega_star: f64, sigma_x: f64, a22: f64) -> SimDesign {
    let c = -2.0 * omega_star.cos();
    let label = |v: f64| {
        let q = v / PI;
        match () {
            _ if q.abs() < 1e-12 => "0".to_string(),
            _ if (q - 1.0).abs() < 1e-12 => "pi".to_string(),
            _ => format!("{}pi", fmt_coef((q * 1e6).round() / 1e6)),
        }
    };
    design(
        format!("breitung_w{}_s{}_a{}", label(omega_star), fmt_coef(sigma_x), fmt_coef(a22)),
        vec![
            vec![vec![0.0, 1.0], vec![0.0, a22]],
            vec![vec![0.0, c], vec![0.0, 0.0]],
            vec![vec![0.0, 1.0], vec![0.0, a22]],
        ],
        vec![vec![sigma_x, 0.0], vec![0.0, 1.0]],
        Functional::Unconditional,
        a22 >= 0.5,
    )
}

/// The built-in catalogue of designs.
pub fn builtin_designs() -> Vec<SimDesign> {
    let mut out = Vec::new();
    for a in [0.0, 0.2, 0.5, 0.8, 1.0] {
        out.push(design(
            format!("diag_{}", fmt_coef(a)),
            vec![vec![vec![a, 0.0], vec![0.0, a]]],
            identity(2),
            Functional::Unconditional,
            a >= 1.0,
        ));
    }
    for c in [0.5, 1.0] {
        out.push(design(
            format!("decr_{}", fmt_coef(c)),
            vec![vec![vec![0.0, c], vec![0.0, c]]],
            identity(2),
            Functional::Unconditional,
            c >= 1.0,
        ));
    }
    let decr3 = |c: f64| vec![vec![vec![0.0, c, 0.0], vec![0.0, c, 0.0], vec![0.0; 3]]];
    for c in [0.5, 1.0] {
        out.push(design(
            format!("cond_decr_{}", fmt_coef(c)),
            decr3(c),
            identity(3),
            Functional::Conditional,
            c >= 1.0,
        ));
    }
    out.push(design(
        "null_cond".into(),
        vec![vec![vec![0.0; 3]; 3]],
        identity(3),
        Functional::Conditional,
        false,
    ));
    out.push(design(
        "diff_null".into(),
        vec![vec![vec![0.0; 3]; 3]],
        identity(3),
        Functional::Difference,
        false,
    ));
    for c in [0.5, 1.0] {
        out.push(design(
            format!("diff_decr_{}", fmt_coef(c)),
            decr3(c),
            identity(3),
            Functional::Difference,
            c >= 1.0,
        ));
    }
    // W shares Y's innovation and lag, and X loads on Y and W lags so that
    // the two channels cancel without conditioning.
    for c in [0.5, 1.0] {
        out.push(design(
            format!("diff_null_uncond_decr_cond_{}", fmt_coef(c)),
            vec![vec![vec![0.0, c, -c], vec![0.0, c, 0.0], vec![0.0, c, 0.0]]],
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 2.0]],
            Functional::Difference,
            c >= 1.0,
        ));
    }
    for omega_star in [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI] {
        for sigma_x in [1.0, 0.2, 5.0] {
            for a22 in [0.0, 0.25, 0.5] {
                out.push(breitung_design(omega_star, sigma_x, a22));
            }
        }
    }
    out
}

/// One row of the overall-test table: which design a case refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Case {
    pub case: usize,
    pub design: String,
    /// Published overall rejection rate for the case.
    pub reference_rate: f64,
}

#[derive(Debug, Deserialize)]
struct Table1File {
    case: Vec<Table1Case>,
}

const TABLE1_TOML: &str = include_str!("../designs/table1.toml");

/// Parses a case-to-design binding in the format of the bundled file.
pub fn parse_table1(text: &str) -> Result<Vec<Table1Case>> {
    let file: Table1File = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    Ok(file.case)
}

/// The bundled case-to-design binding.
pub fn table1_binding() -> Vec<Table1Case> {
    parse_table1(TABLE1_TOML).expect("bundled binding is valid")
}

/// Looks up a design by name.
pub fn find_design<'a>(designs: &'a [SimDesign], name: &str) -> Result<&'a SimDesign> {
    designs
        .iter()
        .find(|d| d.name == name)
        .ok_or_else(|| Error::InvalidDesign(format!("no design named '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_names_are_unique() {
        let d = builtin_designs();
        let mut names: Vec<_> = d.iter().map(|d| d.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), d.len());
        assert_eq!(d.len(), 5 + 2 + 2 + 1 + 1 + 2 + 2 + 45);
    }

    #[test]
    fn breitung_middle_lag() {
        let d = breitung_design(PI / 2.0, 1.0, 0.0);
        assert!(d.a[1][0][1].abs() < 1e-15);
        assert_eq!(d.name, "breitung_w0.5pi_s1_a0");
        assert_eq!(breitung_design(PI, 5.0, 0.25).a[1][0][1], 2.0);
    }

    #[test]
    fn table1_binding_resolves() {
        let designs = builtin_designs();
        let cases = table1_binding();
        assert_eq!(cases.len(), 7);
        for c in &cases {
            find_design(&designs, &c.design).unwrap();
        }
    }

    #[test]
    fn trial_seeds_differ() {
        let a = trial_seeds(1, 0);
        let b = trial_seeds(1, 1);
        assert_ne!(a, b);
        assert_ne!(a.0, a.1);
        assert_eq!(a, trial_seeds(1, 0));
    }

    #[test]
    fn non_stationary_design_needs_flag() {
        let mut d = builtin_designs().into_iter().find(|d| d.name == "decr_1").unwrap();
        assert!(d.validate().is_ok());
        d.boundary = false;
        assert!(matches!(d.validate(), Err(Error::InvalidDesign(_))));
    }

    #[test]
    fn explosive_path_is_reported() {
        let mut d = builtin_designs().into_iter().find(|d| d.name == "diag_1").unwrap();
        d.a = vec![vec![vec![1.5, 0.0], vec![0.0, 1.5]]];
        assert!(matches!(simulate_var(&d, 3), Err(Error::ExplodingPath { .. })));
    }
}
