#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = circlepose::io::parse_experiment_config(text) {
            let _ = cfg.row_count();
        }
    }
});
