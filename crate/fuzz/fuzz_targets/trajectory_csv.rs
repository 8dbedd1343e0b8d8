#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = fairsense_core::fairness::read_trajectory_csv(data);
});
