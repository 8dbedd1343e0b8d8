#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = fairsense_core::config::parse_config(text) {
        // whatever parses must survive its own canonical form
        let Ok(text) = c.canonical() else { return };
        let again = fairsense_core::config::parse_config(&text).expect("canonical config reparses");
        assert_eq!(text, again.canonical().unwrap());
        let _ = c.checks();
    }
});
