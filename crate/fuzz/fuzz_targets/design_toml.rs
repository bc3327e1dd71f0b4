#![no_main]

use freqcause::io::parse_design_config;
use freqcause::sim::parse_table1;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = parse_design_config(text) {
        for d in &cfg.designs {
            d.validate().expect("parsed designs are valid");
            let _ = d.true_model();
        }
    }
    let _ = parse_table1(text);
});
