#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = circlepose::io::parse_focal_model_json(text) {
            let _ = circlepose::intrinsics::default_intrinsics(1280, 720, &m);
        }
    }
});
