#![no_main]

use dslm_core::learning::GapConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = GapConfig::from_json(text) {
        cfg.validate().expect("parsed config is valid");
    }
});
