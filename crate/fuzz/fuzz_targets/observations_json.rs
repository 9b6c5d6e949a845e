#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(set) = circlepose::io::parse_observations_json(text) {
            let _ = set.resolve_intrinsics(&circlepose::FocalModel::builtin());
        }
    }
});
