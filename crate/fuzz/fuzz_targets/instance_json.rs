#![no_main]

use dslm_core::dslm::{evaluate_schedule, Instance};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(inst) = Instance::from_json(text) else { return };
    // A validated instance must evaluate its preferred schedule and round-trip.
    evaluate_schedule(&inst, &inst.pst_schedule()).expect("pst schedule is feasible");
    let back = Instance::from_json(&inst.to_json()).expect("round trip");
    assert_eq!(back, inst);
});
