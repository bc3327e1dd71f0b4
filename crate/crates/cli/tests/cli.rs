use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freqcause"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_code(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    v["error"]["code"].as_str().unwrap().to_string()
}

#[test]
fn white_noise_has_no_bonferroni_rejections() {
    let wn = fixture("white_noise.csv");
    let v = json_ok(&["test-uncond", "--input", &wn, "--effect", "x", "--cause", "y", "--seed", "42", "--n-boot", "400"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r["bonferroni_significant"] == false));
    assert_eq!(v["meta"]["results"][0]["overall_significant"], false);
    assert!(rows[0]["q_lower"].is_null());
}

#[test]
fn spectrum_on_custom_grid() {
    let panel = fixture("euro_like.csv");
    let v = json_ok(&[
        "spectrum", "--input", &panel, "--effect", "gdp", "--cause", "m3", "--log", "gdp", "--log", "m3",
        "--hp-lambda", "1600", "--grid-base", "80",
    ]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 40);
    assert_eq!(rows[0]["frequency"].as_f64().unwrap(), 1.0 / 80.0);
    assert_eq!(rows[39]["frequency"].as_f64().unwrap(), 0.5);
    assert!(rows.iter().all(|r| r["value"].as_f64().unwrap() >= 0.0));
}

#[test]
fn conditional_spectrum_per_conditioning_series() {
    let panel = fixture("euro_like.csv");
    let v = json_ok(&[
        "spectrum", "--input", &panel, "--effect", "gdp", "--cause", "m3", "--conditioning", "hicp",
        "--conditioning", "un", "--lag", "1",
    ]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2 * 38);
    assert_eq!(rows[0]["conditioning"], "hicp");
    assert_eq!(rows[38]["conditioning"], "un");
    assert_eq!(v["meta"]["kind"], "conditional");
}

#[test]
fn bc_test_refuses_single_lag() {
    let wn = fixture("white_noise.csv");
    let out = run(&["bc-test", "--input", &wn, "--effect", "x", "--cause", "y", "--lag", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_code(&out), "BC_INSUFFICIENT_LAGS");
}

#[test]
fn bc_test_with_two_lags() {
    let wn = fixture("white_noise.csv");
    let v = json_ok(&["bc-test", "--input", &wn, "--effect", "x", "--cause", "y", "--lag", "2"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 100);
    assert_eq!(rows[0]["df_num"], 2);
    assert_eq!(rows[99]["df_num"], 1);
    for r in rows {
        let p = r["p_value"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
}

fn csv_rows(bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_reader(bytes);
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn json_and_csv_agree() {
    let wn = fixture("white_noise.csv");
    let base = ["test-cond", "--input", &wn, "--effect", "x", "--cause", "y", "--conditioning", "w", "--seed", "3", "--n-boot", "150"];
    let v = json_ok(&base);
    let mut csv_args = base.to_vec();
    csv_args.extend(["--format", "csv"]);
    let out = run(&csv_args);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&out.stdout);
    let json_rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), json_rows.len());
    for (jr, cr) in json_rows.iter().zip(&rows) {
        for (name, cell) in header.iter().zip(cr) {
            let j = &jr[name];
            match j {
                Value::Number(n) => {
                    let a = n.as_f64().unwrap();
                    let b: f64 = cell.parse().unwrap();
                    assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{name}: {a} vs {b}");
                }
                Value::Null => assert!(cell.is_empty()),
                Value::Bool(b) => assert_eq!(cell, &b.to_string()),
                Value::String(s) => assert_eq!(cell, s),
                other => panic!("unexpected cell {other}"),
            }
        }
    }
}

#[test]
fn same_seed_same_output() {
    let wn = fixture("white_noise.csv");
    let args = ["test-diff", "--input", &wn, "--effect", "x", "--cause", "y", "--conditioning", "w", "--seed", "9", "--n-boot", "120", "--format", "csv"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut other = args.to_vec();
    other[9] = "10";
    assert_ne!(run(&other).stdout, a.stdout);
}

#[test]
fn thread_count_does_not_change_results() {
    let wn = fixture("white_noise.csv");
    let args = ["test-uncond", "--input", &wn, "--effect", "x", "--cause", "y", "--n-boot", "120", "--format", "csv"];
    let one = Command::new(env!("CARGO_BIN_EXE_freqcause"))
        .args(args)
        .env("FREQCAUSE_THREADS", "1")
        .env("RUST_LOG", "off")
        .output()
        .unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, run(&args).stdout);
}

#[test]
fn missing_column_is_reported() {
    let wn = fixture("white_noise.csv");
    let out = run(&["spectrum", "--input", &wn, "--effect", "x", "--cause", "gdp"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_code(&out), "IO_MISSING_COLUMN");
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["spectrum", "--effect", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "CLI_USAGE");
}

#[test]
fn quarterly_average_before_filtering() {
    let monthly = fixture("monthly.csv");
    let v = json_ok(&["hp-filter", "--input", &monthly, "--quarterly-average", "--column", "a"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0]["label"], "2000-03");
    let raw = std::fs::read_to_string(&monthly).unwrap();
    let first: f64 = raw
        .lines()
        .skip(1)
        .take(3)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum::<f64>()
        / 3.0;
    let trend = rows[0]["a_trend"].as_f64().unwrap();
    let cycle = rows[0]["a_cycle"].as_f64().unwrap();
    assert!((trend + cycle - first).abs() < 1e-10);
}

#[test]
fn output_file_and_frequency_scale() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let wn = fixture("white_noise.csv");
    let out = run(&[
        "spectrum", "--input", &wn, "--effect", "x", "--cause", "y", "--lag", "1", "--freq-scale", "4",
        "--output", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let last = v["rows"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(last["frequency"].as_f64().unwrap(), 2.0);
    assert_eq!(last["omega"].as_f64().unwrap(), std::f64::consts::PI);
}

#[test]
fn simulate_reports_bound_cases() {
    let out = run(&[
        "simulate", "--table1", "--n-mc", "50", "--n-boot", "100", "--length", "40", "--format", "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let designs = v["meta"]["designs"].as_array().unwrap();
    assert_eq!(designs.len(), 7);
    assert_eq!(designs[0]["case"], 1);
    assert_eq!(v["rows"].as_array().unwrap().len(), 7 * 20);
}

#[test]
fn design_file_replaces_catalogue() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.toml");
    std::fs::write(
        &path,
        "[[design]]\nname = \"tiny\"\na = [[[0.2, 0.3], [0.0, 0.1]]]\nsigma_diag = [1.0, 1.0]\nT = 40\nn_mc = 50\n",
    )
    .unwrap();
    let v = json_ok(&["simulate", "--config", path.to_str().unwrap(), "--n-boot", "100"]);
    assert_eq!(v["meta"]["designs"][0]["design"], "tiny");
    let bad = run(&["simulate", "--config", path.to_str().unwrap(), "--design", "decr_1"]);
    assert_eq!(error_code(&bad), "SIM_INVALID_DESIGN");
}
