#![no_main]
use libfuzzer_sys::fuzz_target;
use pipeline::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_toml_str(s) {
        // anything accepted must survive a round trip
        let back = RunConfig::from_toml_str(&cfg.to_toml_string()).expect("round trip");
        assert_eq!(back.criteria, cfg.criteria);
    }
});
