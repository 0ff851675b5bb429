#![no_main]

use dslm_core::game::Memory1Strategy;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = text.parse::<Memory1Strategy>() {
        assert_eq!(s.name().parse::<Memory1Strategy>().unwrap(), s);
    }
});
