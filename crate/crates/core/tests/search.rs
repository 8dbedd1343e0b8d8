use std::sync::Arc;

use fairsense_core::config::{preset, Curve, ScenarioConfig};
use fairsense_core::rng::{self, Domain};
use fairsense_core::search::*;
use fairsense_core::Error;

fn scenario(name: &str, f: impl FnOnce(&mut ScenarioConfig)) -> SearchScenario {
    let mut c = preset(name).unwrap();
    f(&mut c);
    SearchScenario::new(c).unwrap()
}

/// Build without validation, for configurations that deliberately break a precondition.
fn unchecked(c: ScenarioConfig) -> SearchScenario {
    let city = Arc::new(generate_city(&c.city, c.spots).unwrap());
    SearchScenario { config: c, city }
}

/// Every car parked, every car on, from t = 0 onwards.
fn forced_on() -> SearchScenario {
    let mut c = preset("small").unwrap();
    c.occupancy = 1.0;
    c.initial_on = 1.0;
    for curve in [&mut c.behavior.few, &mut c.behavior.some, &mut c.behavior.many] {
        *curve = Curve { slope: 1e-9, intercept: 30.0 };
    }
    c.floor = 1e-300;
    unchecked(c)
}

#[test]
fn full_occupancy_parks_everywhere() {
    let s = scenario("small", |c| {
        c.occupancy = 1.0;
        c.pedestrian = false;
    });
    let run = run_search(&s, 5, &SearchOptions::default()).unwrap();
    assert_eq!(run.occupied, s.config.spots);
}

#[test]
fn half_occupancy_count_at_full_scale() {
    let s = scenario("melbourne-scale", |c| c.pedestrian = false);
    for seed in 0..5 {
        let run = run_search(&s, seed, &SearchOptions::default()).unwrap();
        assert!((run.occupied as f64 - 12_034.0).abs() <= 200.0, "seed {seed}: {}", run.occupied);
    }
}

#[test]
fn empty_city_fails_at_timeout() {
    let s = scenario("small", |c| c.occupancy = 0.0);
    let run = run_search(&s, 1, &SearchOptions::default()).unwrap();
    assert_eq!(run.participants, 0);
    assert!(!run.outcome.detected);
    assert_eq!(run.outcome.detection_time_s, None);
    assert_eq!(run.record.len(), 1_800 / 20 + 1);
    assert!(run.record.y.iter().all(|y| *y == 0.0));
}

#[test]
fn forced_on_detects_at_first_proximity() {
    let s = forced_on();
    for seed in 0..10 {
        let run = run_search(&s, seed, &SearchOptions::default()).unwrap();
        // oracle: replay the walk and scan every bay by brute force
        let mut ped = Pedestrian::spawn(&s.city, s.config.ped_speed_mps, rng::stream(seed, Domain::Pedestrian, 0));
        let mut expected = None;
        for t in 0..=s.config.ticks() {
            if t > 0 {
                ped.step(&s.city, 1.0);
            }
            let at = ped.position(&s.city);
            if s.city.spots.iter().any(|p| (p.x - at.x).hypot(p.y - at.y) <= 6.0) {
                expected = Some(t as f64);
                break;
            }
        }
        assert_eq!(run.outcome.detection_time_s, expected, "seed {seed}");
    }
}

#[test]
fn single_forced_campaign_summary() {
    let s = forced_on();
    let c = run_campaign(&s, 1, 3).unwrap();
    let sum = summarize(&c.sims, 100, 0).unwrap();
    assert_eq!(sum.failures, 0);
    assert_eq!(sum.mean_detection_s.unwrap().estimate, c.sims[0].detection_time_s.unwrap());
}

#[test]
fn on_count_never_exceeds_participants() {
    let s = scenario("small", |c| {
        c.pedestrian = false;
        c.city.participation = 0.7;
    });
    let run = run_search(&s, 8, &SearchOptions::default()).unwrap();
    assert!(run.participants < run.occupied);
    assert!(run.record.y.iter().all(|y| *y <= run.participants as f64));
}

#[test]
fn campaign_csv_is_reproducible() {
    let s = scenario("small", |_| {});
    let bytes = |seed| {
        let mut buf = Vec::new();
        write_campaign_csv(&mut buf, &run_campaign(&s, 8, seed).unwrap().sims).unwrap();
        buf
    };
    assert_eq!(bytes(4), bytes(4));
    assert_ne!(bytes(4), bytes(5));
    let back = read_campaign_csv(&bytes(4)[..]).unwrap();
    assert_eq!(back.len(), 8);
}

fn time_or_timeout(r: &SimRecord, timeout: f64) -> f64 {
    r.detection_time_s.unwrap_or(timeout + 1.0)
}

#[test]
fn larger_reader_radius_never_slows_detection() {
    let base = scenario("small", |_| {});
    let wide = scenario("small", |c| c.rfid_radius_m = 12.0);
    let a = run_campaign(&base, 50, 21).unwrap();
    let b = run_campaign(&wide, 50, 21).unwrap();
    for (x, y) in a.sims.iter().zip(&b.sims) {
        assert_eq!(x.seed, y.seed);
        assert!(time_or_timeout(y, 1800.0) <= time_or_timeout(x, 1800.0), "sim {}: {:?} vs {:?}", x.sim_id, x, y);
    }
    let mean = |c: &Campaign| c.sims.iter().map(|s| time_or_timeout(s, 1800.0)).sum::<f64>() / 50.0;
    assert!(mean(&b) < mean(&a));
}

#[test]
fn higher_occupancy_speeds_detection_on_average() {
    let lo = scenario("small", |_| {});
    let hi = scenario("small", |c| {
        c.occupancy = 0.8;
        c.r_target = 1_800.0 * 0.8 / 0.5;
    });
    let mean = |s: &SearchScenario| {
        let c = run_campaign(s, 60, 33).unwrap();
        c.sims.iter().map(|r| time_or_timeout(r, 1800.0)).sum::<f64>() / 60.0
    };
    assert!(mean(&hi) < mean(&lo));
}

#[test]
fn regulation_band_across_seeds() {
    let s = scenario("melbourne-scale", |c| c.pedestrian = false);
    let r = s.config.r_target;
    let runs: Vec<_> = (0..10).map(|i| run_search(&s, sim_seed(7, i), &SearchOptions::default()).unwrap()).collect();
    for run in &runs {
        let settle = run.record.first_entry(r, 0.1).expect("enters the band");
        assert!(settle * 20 <= 300);
    }
    // after five minutes, the cross-seed mean ± one std stays inside ±10%
    for k in 15..runs[0].record.len() {
        let ys: Vec<f64> = runs.iter().map(|run| run.record.y[k]).collect();
        let m = ys.iter().sum::<f64>() / 10.0;
        let sd = (ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / 9.0).sqrt();
        assert!(m - sd > 0.9 * r && m + sd < 1.1 * r, "k={k}: {m} ± {sd}");
    }
}

#[test]
fn floor_is_enforced_in_the_loop() {
    let mut c = preset("small").unwrap();
    c.pedestrian = false;
    c.controller.kappa = 100.0;
    c.floor = 0.01;
    let err = run_search(&unchecked(c), 1, &SearchOptions::default()).unwrap_err();
    assert!(matches!(err, Error::FloorViolation { .. }), "{err}");
}

#[test]
fn tracked_histories_are_binary() {
    let s = scenario("small", |c| c.pedestrian = false);
    let run = run_search(&s, 2, &SearchOptions { track_vehicles: 20 }).unwrap();
    assert_eq!(run.tracked.len(), 20);
    for (_, h) in &run.tracked {
        assert!(h.iter().all(|v| *v == 0.0 || *v == 1.0));
        assert_eq!(h.len(), run.record.len());
    }
    let on_at_0 = run.tracked.iter().filter(|(_, h)| h[0] == 1.0).count();
    assert!(on_at_0 < 20);
}
