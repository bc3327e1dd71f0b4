#![no_main]

use freqcause::io::{ingest_csv_bytes, CsvSchema, LabelColumn};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    for labels in [LabelColumn::Auto, LabelColumn::Present, LabelColumn::Absent] {
        let schema = CsvSchema {
            labels,
            ..CsvSchema::default()
        };
        if let Ok(series) = ingest_csv_bytes(data, &schema) {
            assert!(series.n_series() >= 1);
            assert!(series.columns().iter().all(|c| c.len() == series.len()));
            assert!(series.columns().iter().flatten().all(|v| v.is_finite()));
            let _ = series.aggregate_mean(3);
        }
    }
});
