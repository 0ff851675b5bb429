#![no_main]

use dslm_core::dslm::{evaluate_schedule, Schedule};
use dslm_core::instances::example_instance_sec2;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(s) = Schedule::from_json(text) else { return };
    // Shape and window errors are fine; panics are not.
    let _ = evaluate_schedule(&example_instance_sec2(), &s);
});
