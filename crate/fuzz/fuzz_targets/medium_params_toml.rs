#![no_main]
use lattice::{build_medium, MediumParams};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(p) = MediumParams::from_toml_str(s) {
        let _ = build_medium(&p);
    }
});
