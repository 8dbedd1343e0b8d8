#![no_main]
use libfuzzer_sys::fuzz_target;
use fairsense_core::search::{read_campaign_csv, write_campaign_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(rows) = read_campaign_csv(data) else { return };
    let mut out = Vec::new();
    write_campaign_csv(&mut out, &rows).unwrap();
    assert_eq!(read_campaign_csv(&out[..]).unwrap(), rows);
});
