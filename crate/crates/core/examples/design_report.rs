//! Runs one catalogue design and prints its rate curves.
//!
//! Usage: design_report <design> [n_mc] [n_boot] [seed] [T]

use std::time::Instant;

use freqcause::bootstrap::BootstrapConfig;
use freqcause::sim::{builtin_designs, find_design, run_design, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let name = args.get(1).map(String::as_str).unwrap_or("decr_0.5");
    let designs = builtin_designs();
    let mut design = find_design(&designs, name)?.clone();
    if let Some(n) = args.get(2) {
        design.n_mc = n.parse()?;
    }
    let n_boot = args.get(3).map(|s| s.parse()).transpose()?.unwrap_or(500);
    let seed = args.get(4).map(|s| s.parse()).transpose()?.unwrap_or(1);
    if let Some(t) = args.get(5) {
        design.t = t.parse()?;
    }
    let config = SimConfig {
        bootstrap: BootstrapConfig {
            n_boot,
            ..BootstrapConfig::default()
        },
        seed,
        bc: true,
    };
    let start = Instant::now();
    let report = run_design(&design, &config)?;
    println!("design {} ({} trials, {:.1}s)", design.name, report.n_trials, start.elapsed().as_secs_f64());
    println!("overall {:.3}", report.overall_bonferroni_rate);
    println!("freq      reject  prom    dp      bc");
    for i in 0..report.frequencies.len() {
        let bc = report.bc_rejection_rate.as_ref().map_or(f64::NAN, |r| r[i]);
        println!(
            "{:.4}  {:.3}   {:.3}   {:.3}   {:.3}",
            report.frequencies[i], report.rejection_rate[i], report.prominence_rate[i], report.degree_of_prominence[i], bc
        );
    }
    Ok(())
}
