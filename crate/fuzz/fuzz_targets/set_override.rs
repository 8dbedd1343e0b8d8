#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = fairsense_core::config::parse_override(text);
    let _ = fairsense_core::config::resolve(Some("small"), None, &[text.to_owned()]);
});
