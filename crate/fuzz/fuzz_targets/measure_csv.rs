#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = fairsense_core::measure::read_measure_csv(data) {
        let _ = m.into_discrete();
    }
});
