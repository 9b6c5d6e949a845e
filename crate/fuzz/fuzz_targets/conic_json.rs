#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(c) = circlepose::io::parse_conic_json(text) {
            let _ = c.ellipse_geometry();
            let k = circlepose::CameraIntrinsics::new(1280.0, 1280, 720).unwrap();
            let _ = circlepose::estimate_pose(&c, &k, 1.0, circlepose::pipeline::SidePrior::AssumeCentered);
        }
    }
});
