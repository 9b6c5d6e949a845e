#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(pts) = circlepose::io::parse_contour_csv(text) {
            let _ = circlepose::fit_ellipse(&pts);
        }
    }
});
