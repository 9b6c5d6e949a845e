#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(d) = circlepose::io::parse_devices_json(text) {
            let _ = circlepose::FocalModel::from_devices(d);
        }
    }
});
