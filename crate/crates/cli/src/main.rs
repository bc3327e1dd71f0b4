mod args;
mod output;

use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use freqcause::bc::{bc_test, bc_test_conditional, BcResult};
use freqcause::bootstrap::{test_roles, BootstrapConfig, LagPolicy, TestResult};
use freqcause::filters::hp_filter;
use freqcause::io::{ingest_csv, load_design_config, CsvSchema};
use freqcause::sim::{builtin_designs, find_design, run_design, table1_binding, SimConfig, SimDesign, Table1Case};
use freqcause::spectra::{gc_spectrum, FrequencyGrid, Functional, LagChoice, Roles, SpectrumConfig, SpectrumResult};
use freqcause::var::select_lag_bic;
use freqcause::MultiSeries;

use args::{BcArgs, BootArgs, Cli, Command, DataArgs, HpArgs, KindArg, LagPolicyArg, ModelArgs, RoleArgs, SimulateArgs, SpectrumArgs, TestArgs};
use output::Report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] freqcause::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Usage(_) => "CLI_USAGE",
            CliError::Output(_) => "CLI_OUTPUT",
        }
    }
}

fn fail(code: &str, message: &str, status: u8) -> ExitCode {
    let body = json!({ "error": { "code": code, "message": message } });
    eprintln!("{body}");
    ExitCode::from(status)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("CLI_USAGE", e.to_string().trim(), 2),
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let status = if matches!(e, CliError::Usage(_)) { 2 } else { 1 };
            fail(e.code(), &e.to_string(), status)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    let (report, out) = match command {
        Command::Spectrum(a) => (spectrum(&a)?, a.output),
        Command::TestUncond(a) => (bootstrap_test(&a, Functional::Unconditional, "test-uncond")?, a.output),
        Command::TestCond(a) => (bootstrap_test(&a, Functional::Conditional, "test-cond")?, a.output),
        Command::TestDiff(a) => (bootstrap_test(&a, Functional::Difference, "test-diff")?, a.output),
        Command::BcTest(a) => (bc(&a)?, a.output),
        Command::Simulate(a) => (simulate(&a)?, a.output),
        Command::HpFilter(a) => (hp(&a)?, a.output),
    };
    report.emit(&out)
}

/// Read, aggregate, log-transform, then HP-filter.
fn load_panel(path: &std::path::Path, quarterly: bool, log_cols: &[String], hp_lambda: Option<f64>) -> Result<MultiSeries, CliError> {
    let mut data = ingest_csv(path, &CsvSchema::default())?;
    if quarterly {
        data = data.aggregate_mean(3)?;
    }
    for name in log_cols {
        let j = data.index_of(name)?;
        if let Some(bad) = data.column(j).iter().find(|v| **v <= 0.0) {
            return Err(freqcause::Error::InvalidInput(format!("cannot take the log of {bad} in column '{name}'")).into());
        }
        data.map_column(j, f64::ln)?;
    }
    if let Some(lambda) = hp_lambda {
        for j in 0..data.n_series() {
            let cycle = hp_filter(data.column(j), lambda)?.cycle;
            data.replace_column(j, cycle)?;
        }
    }
    Ok(data)
}

fn load_data(a: &DataArgs) -> Result<MultiSeries, CliError> {
    load_panel(&a.input, a.quarterly_average, &a.log, a.hp_lambda)
}

/// One role assignment per conditioning series, or a single one without.
fn role_sets(data: &MultiSeries, r: &RoleArgs) -> Result<Vec<(Option<String>, Roles)>, CliError> {
    let effect = data.index_of(&r.effect)?;
    let cause = data.index_of(&r.cause)?;
    if r.conditioning.is_empty() {
        return Ok(vec![(None, Roles { effect, cause, conditioning: None })]);
    }
    r.conditioning
        .iter()
        .map(|w| {
            let conditioning = Some(data.index_of(w)?);
            Ok((Some(w.clone()), Roles { effect, cause, conditioning }))
        })
        .collect()
}

fn lag_choice(m: &ModelArgs) -> LagChoice {
    match m.lag {
        Some(k) => LagChoice::Fixed(k),
        None => LagChoice::Bic { k_max: m.k_max },
    }
}

fn base_meta(report: &mut Report, data: &MultiSeries, roles: &RoleArgs) {
    report.meta.insert("n_obs".into(), json!(data.len()));
    report.meta.insert("effect".into(), json!(roles.effect));
    report.meta.insert("cause".into(), json!(roles.cause));
}

fn spectrum(a: &SpectrumArgs) -> Result<Report, CliError> {
    let data = load_data(&a.data)?;
    let functional = match a.kind {
        Some(KindArg::Unconditional) => Functional::Unconditional,
        Some(KindArg::Conditional) => Functional::Conditional,
        Some(KindArg::Difference) => Functional::Difference,
        None if a.roles.conditioning.is_empty() => Functional::Unconditional,
        None => Functional::Conditional,
    };
    let mut sets = role_sets(&data, &a.roles)?;
    if functional.needs_conditioning() && sets[0].1.conditioning.is_none() {
        return Err(CliError::Usage(format!("{functional} spectrum needs --conditioning")));
    }
    if !functional.needs_conditioning() {
        sets.truncate(1);
        sets[0].0 = None;
        sets[0].1.conditioning = None;
    }
    let config = SpectrumConfig {
        functional,
        lag: lag_choice(&a.model),
        with_intercept: !a.model.no_intercept,
        grid_base: a.model.grid_base,
    };
    let mut report = Report::new("spectrum", &["conditioning", "frequency", "omega", "value"]);
    base_meta(&mut report, &data, &a.roles);
    report.meta.insert("kind".into(), json!(functional.to_string()));
    let mut results = Vec::new();
    for (w, roles) in &sets {
        let s = gc_spectrum(&data, roles, &config)?;
        push_spectrum_rows(&mut report, w.as_deref(), &s, a.output.freq_scale);
        results.push(json!({
            "conditioning": w,
            "lag_orders": s.lag_orders,
            "grid_base": s.grid.base(),
            "median": finite(s.median()),
        }));
    }
    report.meta.insert("results".into(), Value::Array(results));
    Ok(report)
}

fn finite(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn push_spectrum_rows(report: &mut Report, w: Option<&str>, s: &SpectrumResult, scale: f64) {
    for (i, (f, v)) in s.grid.frequencies().iter().zip(&s.values).enumerate() {
        report.push(vec![w.into(), (f * scale).into(), s.grid.omega(i).into(), (*v).into()]);
    }
}

fn bootstrap_config(b: &BootArgs, lag: Option<usize>, k_max: usize, no_intercept: bool, grid_base: Option<usize>, default_n_boot: usize) -> BootstrapConfig {
    BootstrapConfig {
        n_boot: b.n_boot.unwrap_or(default_n_boot),
        alpha: b.alpha,
        block_length: b.block_length,
        seed: b.seed,
        lag_policy: match b.lag_policy {
            LagPolicyArg::FixedFromData => LagPolicy::FixedFromData,
            LagPolicyArg::ReselectPerReplicate => LagPolicy::ReselectPerReplicate,
        },
        k_max,
        fixed_lag: lag,
        with_intercept: !no_intercept,
        grid_base,
    }
}

fn bootstrap_test(a: &TestArgs, functional: Functional, command: &str) -> Result<Report, CliError> {
    let data = load_data(&a.data)?;
    let mut sets = role_sets(&data, &a.roles)?;
    if functional.needs_conditioning() && sets[0].1.conditioning.is_none() {
        return Err(CliError::Usage(format!("{command} needs --conditioning")));
    }
    if !functional.needs_conditioning() {
        sets.truncate(1);
        sets[0].0 = None;
        sets[0].1.conditioning = None;
    }
    let config = bootstrap_config(&a.boot, a.model.lag, a.model.k_max, a.model.no_intercept, a.model.grid_base, 1000);
    config.validate()?;

    let mut report = Report::new(
        command,
        &[
            "conditioning",
            "frequency",
            "omega",
            "value",
            "q_lower",
            "q_upper",
            "significant",
            "bonferroni_q_lower",
            "bonferroni_q_upper",
            "bonferroni_significant",
        ],
    );
    base_meta(&mut report, &data, &a.roles);
    report.meta.insert("alpha".into(), json!(config.alpha));
    report.meta.insert("n_boot".into(), json!(config.n_boot));
    report.meta.insert("seed".into(), json!(config.seed));
    let mut results = Vec::new();
    for (w, roles) in &sets {
        let r = test_roles(&data, roles, functional, &config)?;
        for warning in &r.warnings {
            log::warn!("{warning}");
        }
        push_test_rows(&mut report, w.as_deref(), &r, a.output.freq_scale);
        results.push(json!({
            "conditioning": w,
            "lag_orders": r.spectrum.lag_orders,
            "grid_base": r.spectrum.grid.base(),
            "overall_significant": r.overall_significant,
            "boot_median": finite(r.boot_median()),
            "block_length": r.block_length,
            "n_failed": r.n_failed,
            "warnings": r.warnings,
        }));
    }
    report.meta.insert("results".into(), Value::Array(results));
    Ok(report)
}

fn push_test_rows(report: &mut Report, w: Option<&str>, r: &TestResult, scale: f64) {
    let s = &r.spectrum;
    for (i, f) in s.grid.frequencies().iter().enumerate() {
        report.push(vec![
            w.into(),
            (f * scale).into(),
            s.grid.omega(i).into(),
            s.values[i].into(),
            r.q_lower.into(),
            r.q_upper.into(),
            r.flags[i].into(),
            r.bonferroni_q_lower.into(),
            r.bonferroni_q_upper.into(),
            r.bonferroni_flags[i].into(),
        ]);
    }
}

fn bc(a: &BcArgs) -> Result<Report, CliError> {
    let data = load_data(&a.data)?;
    let sets = role_sets(&data, &a.roles)?;
    let grid = FrequencyGrid::fourier(a.grid_base.unwrap_or(data.len()))?;
    let mut report = Report::new(
        "bc-test",
        &["conditioning", "frequency", "omega", "f_statistic", "p_value", "df_num", "df_den", "significant"],
    );
    base_meta(&mut report, &data, &a.roles);
    report.meta.insert("alpha".into(), json!(a.alpha));
    let mut results = Vec::new();
    for (w, roles) in &sets {
        let mut cols = vec![roles.effect, roles.cause];
        cols.extend(roles.conditioning);
        let k = match a.lag {
            Some(k) => k,
            None => select_lag_bic(&data.select(&cols)?, a.k_max, true)?.chosen_k,
        };
        let x = data.column(roles.effect);
        let y = data.column(roles.cause);
        let r = match roles.conditioning {
            Some(j) => bc_test_conditional(x, y, data.column(j), k, &grid)?,
            None => bc_test(x, y, k, &grid)?,
        };
        push_bc_rows(&mut report, w.as_deref(), &r, &grid, a.alpha, a.output.freq_scale);
        results.push(json!({ "conditioning": w, "k": r.k }));
    }
    report.meta.insert("results".into(), Value::Array(results));
    Ok(report)
}

fn push_bc_rows(report: &mut Report, w: Option<&str>, r: &BcResult, grid: &FrequencyGrid, alpha: f64, scale: f64) {
    for (i, f) in grid.frequencies().iter().enumerate() {
        report.push(vec![
            w.into(),
            (f * scale).into(),
            r.omegas[i].into(),
            r.f_statistics[i].into(),
            r.p_values[i].into(),
            r.df[i].num.into(),
            r.df[i].den.into(),
            (r.p_values[i] < alpha).into(),
        ]);
    }
}

fn simulate(a: &SimulateArgs) -> Result<Report, CliError> {
    let (catalogue, binding) = match &a.config {
        Some(path) => {
            let cfg = load_design_config(path)?;
            (cfg.designs, cfg.table1)
        }
        None => (builtin_designs(), table1_binding()),
    };
    let mut chosen: Vec<(SimDesign, Option<&Table1Case>)> = Vec::new();
    if a.table1 {
        if binding.is_empty() {
            return Err(CliError::Usage("the design file binds no overall-test cases".into()));
        }
        for case in &binding {
            chosen.push((find_design(&catalogue, &case.design)?.clone(), Some(case)));
        }
    }
    for name in &a.design {
        chosen.push((find_design(&catalogue, name)?.clone(), None));
    }
    if chosen.is_empty() {
        chosen = catalogue.iter().cloned().map(|d| (d, None)).collect();
    }
    for (d, _) in &mut chosen {
        if let Some(n) = a.n_mc {
            d.n_mc = n;
        }
        if let Some(t) = a.length {
            d.t = t;
        }
        d.validate()?;
    }
    let config = SimConfig {
        bootstrap: bootstrap_config(&a.boot, None, a.k_max, a.no_intercept, None, 500),
        seed: a.boot.seed,
        bc: a.bc,
    };
    config.bootstrap.validate()?;

    let mut report = Report::new(
        "simulate",
        &["design", "frequency", "rejection_rate", "prominence_rate", "degree_of_prominence", "bc_rejection_rate"],
    );
    report.meta.insert("alpha".into(), json!(config.bootstrap.alpha));
    report.meta.insert("n_boot".into(), json!(config.bootstrap.n_boot));
    report.meta.insert("seed".into(), json!(config.seed));
    let mut designs = Vec::new();
    for (d, case) in &chosen {
        let r = run_design(d, &config)?;
        if r.n_failed > 0 {
            log::warn!("{}: {} of {} trials failed", d.name, r.n_failed, d.n_mc);
        }
        for (i, f) in r.frequencies.iter().enumerate() {
            report.push(vec![
                d.name.as_str().into(),
                (f * a.output.freq_scale).into(),
                r.rejection_rate[i].into(),
                r.prominence_rate[i].into(),
                r.degree_of_prominence[i].into(),
                r.bc_rejection_rate.as_ref().map(|b| b[i]).into(),
            ]);
        }
        designs.push(json!({
            "design": d.name,
            "functional": d.functional.to_string(),
            "T": d.t,
            "n_mc": d.n_mc,
            "n_trials": r.n_trials,
            "n_failed": r.n_failed,
            "bc_trials": r.bc_trials,
            "overall_bonferroni_rate": r.overall_bonferroni_rate,
            "case": case.map(|c| c.case),
            "reference_rate": case.map(|c| c.reference_rate),
        }));
    }
    report.meta.insert("designs".into(), Value::Array(designs));
    Ok(report)
}

fn hp(a: &HpArgs) -> Result<Report, CliError> {
    let data = load_panel(&a.input, a.quarterly_average, &a.log, None)?;
    let names: Vec<String> = if a.column.is_empty() { data.names().to_vec() } else { a.column.clone() };
    let mut parts = Vec::new();
    for name in &names {
        parts.push(hp_filter(data.column_by_name(name)?, a.lambda)?);
    }
    let mut columns = vec!["index".to_string(), "label".to_string()];
    for name in &names {
        columns.push(format!("{name}_trend"));
        columns.push(format!("{name}_cycle"));
    }
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut report = Report::new("hp-filter", &column_refs);
    report.meta.insert("lambda".into(), json!(a.lambda));
    report.meta.insert("n_obs".into(), json!(data.len()));
    for t in 0..data.len() {
        let mut row = vec![t.into(), data.labels().map(|l| l[t].as_str()).into()];
        for p in &parts {
            row.push(p.trend[t].into());
            row.push(p.cycle[t].into());
        }
        report.push(row);
    }
    Ok(report)
}
