//! Replays the checked-in fuzz seeds through the same checks the fuzz
//! targets make, so the stable toolchain covers them too.

use std::path::PathBuf;

use fairsense_core::config::{parse_config, parse_override, resolve};
use fairsense_core::control::read_loop_csv;
use fairsense_core::fairness::read_trajectory_csv;
use fairsense_core::measure::read_measure_csv;
use fairsense_core::search::{read_campaign_csv, write_campaign_csv};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut v: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    v.sort();
    assert!(!v.is_empty(), "no seeds for {target}");
    v
}

#[test]
fn config_seeds() {
    let mut parsed = 0;
    for (name, data) in seeds("config_parse") {
        let text = String::from_utf8(data).unwrap();
        let Ok(c) = parse_config(&text) else { continue };
        let canon = c.canonical().unwrap();
        assert_eq!(canon, parse_config(&canon).unwrap().canonical().unwrap(), "{name}");
        let _ = c.checks();
        parsed += 1;
    }
    assert!(parsed >= 3);
}

#[test]
fn override_seeds() {
    let mut ok = 0;
    for (_, data) in seeds("set_override") {
        let text = String::from_utf8(data).unwrap();
        let _ = parse_override(&text);
        ok += usize::from(resolve(Some("small"), None, &[text]).is_ok());
    }
    assert!(ok >= 3);
}

#[test]
fn loop_seeds() {
    for (name, data) in seeds("loop_csv") {
        let rec = read_loop_csv(&data[..]).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(rec.len(), 28);
    }
}

#[test]
fn trajectory_seeds() {
    for (name, data) in seeds("trajectory_csv") {
        let r = read_trajectory_csv(&data[..]);
        assert_eq!(r.is_ok(), !name.starts_with("bad"), "{name}");
    }
}

#[test]
fn measure_seeds() {
    for (name, data) in seeds("measure_csv") {
        match read_measure_csv(&data[..]) {
            Ok(m) => {
                m.into_discrete().unwrap();
            }
            Err(_) => assert!(name.starts_with("bad"), "{name}"),
        }
    }
}

#[test]
fn campaign_seeds_round_trip() {
    for (name, data) in seeds("campaign_csv") {
        let Ok(rows) = read_campaign_csv(&data[..]) else {
            assert!(name.starts_with("missing"), "{name}");
            continue;
        };
        let mut out = Vec::new();
        write_campaign_csv(&mut out, &rows).unwrap();
        assert_eq!(read_campaign_csv(&out[..]).unwrap(), rows);
    }
}
