#![no_main]

use circle_patterns::io::mesh_from_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // Must reject or accept without panicking; accepted meshes must
        // round-trip and validate.
        if let Ok(mesh) = mesh_from_json(text) {
            let rep = mesh.validate();
            assert!(rep.all_pass());
            let again = mesh_from_json(&circle_patterns::io::mesh_to_json(&mesh)).unwrap();
            assert_eq!(again.p, mesh.p);
            assert_eq!(again.q, mesh.q);
        }
    }
});
