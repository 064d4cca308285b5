#![no_main]

use libfuzzer_sys::fuzz_target;
use svwe_channel::antenna::load_custom_coefficients;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for raw in [false, true] {
        if let Ok(model) = load_custom_coefficients(text, raw) {
            assert!(model.radiation.iter().all(|(_, v)| v.re.is_finite() && v.im.is_finite()));
        }
    }
});
