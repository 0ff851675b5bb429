#![no_main]

use dslm_core::instances::{generate_instance, GeneratorConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = GeneratorConfig::from_json(text) else { return };
    // Keep generation cheap.
    if cfg.n_consumers * cfg.appliances_per_consumer > 64 || cfg.horizon > 512 {
        return;
    }
    if let Ok(inst) = generate_instance(&cfg) {
        inst.validate().expect("generated instance is valid");
    }
});
