#![no_main]

use circle_patterns::io::pattern_from_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = pattern_from_json(text);
    }
});
