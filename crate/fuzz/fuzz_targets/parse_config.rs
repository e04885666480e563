#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = attsync::config::parse_config(text) {
            // a parsed config must be internally consistent
            cfg.validate().expect("parse_config returned an invalid config");
            let _ = attsync::pipeline::check(&cfg);
        }
    }
});
