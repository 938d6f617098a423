#![no_main]

use circle_patterns::io::{parse_a, parse_angle, parse_grid_spec, parse_theta};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(v) = parse_angle(text) {
            assert!(v.is_finite());
        }
        if let Ok(t) = parse_theta(text) {
            assert!(t.iter().all(|x| x.is_finite()));
        }
        if let Ok(a) = parse_a(text) {
            assert!(a[0].is_finite() && a[1].is_finite());
        }
        if let Ok(g) = parse_grid_spec(text) {
            assert!(g.nx >= 1 && g.ny >= 1);
            if g.nx * g.ny <= 4096 {
                assert_eq!(g.points().len(), g.nx * g.ny);
            }
        }
    }
});
