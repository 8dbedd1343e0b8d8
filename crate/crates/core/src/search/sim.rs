use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::control::{apply_environment_perturbation, filter_step, Broadcaster, ControllerState, LoopRecord};
use crate::error::{Error, Result};
use crate::rng::{self, Domain, Stream};
use crate::search::behavior::Class;
use crate::search::{classify_and_toss, generate_city, neighbor_counts, GridCity, Pedestrian, Point, SpatialHash};

const PARALLEL_VEHICLES: usize = 512;

/// A parked car taking part in sensing.
#[derive(Debug, Clone)]
pub struct Vehicle {
    /// Index of the bay it occupies; also its random-stream id.
    pub spot: u32,
    pub pos: Point,
    pub on: bool,
    /// Participating cars within the neighbour radius, self excluded.
    pub neighbors: u32,
}

/// Closed disk of radius `r` around an on car.
pub fn detect(v: &Vehicle, at: Point, r: f64) -> bool {
    v.on && v.pos.dist2(at) <= r * r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOutcome {
    pub detected: bool,
    /// Present exactly when `detected`.
    pub detection_time_s: Option<f64>,
    pub detector: Option<u32>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SearchOptions {
    /// Record the on/off history of this many participants (in bay order).
    pub track_vehicles: usize,
}

#[derive(Debug, Clone)]
pub struct SearchRun {
    pub outcome: SearchOutcome,
    /// One row per control epoch, `k = 0` at `t = 0`.
    pub record: LoopRecord,
    pub occupied: usize,
    pub participants: usize,
    /// `(spot, on-state per epoch)` for tracked cars.
    pub tracked: Vec<(u32, Vec<f64>)>,
}

/// Validated configuration plus the fixed street layout.
#[derive(Debug, Clone)]
pub struct SearchScenario {
    pub config: ScenarioConfig,
    pub city: Arc<GridCity>,
}

impl SearchScenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let city = Arc::new(generate_city(&config.city, config.spots)?);
        Ok(Self { config, city })
    }
}

/// Draws who parked where and who participates, then the initial on-states.
///
/// Each bay consumes one occupancy draw and one participation draw from
/// fixed streams, so two runs that differ only in `occupancy` see nested
/// sets of parked cars.
fn populate(s: &SearchScenario, sim_seed: u64) -> (usize, Vec<Vehicle>) {
    let c = &s.config;
    let mut occ = rng::stream(sim_seed, Domain::Occupancy, 0);
    let mut part = rng::stream(sim_seed, Domain::Occupancy, 1);
    let mut init = rng::stream(sim_seed, Domain::InitialState, 0);
    let mut occupied = 0;
    let mut out = Vec::new();
    for (i, p) in s.city.spots.iter().enumerate() {
        let parked = rng::unit(&mut occ) < c.occupancy;
        let joins = rng::unit(&mut part) < c.city.participation;
        let on = rng::unit(&mut init) < c.initial_on;
        if parked {
            occupied += 1;
            if joins {
                out.push(Vehicle { spot: i as u32, pos: *p, on, neighbors: 0 });
            }
        }
    }
    let positions: Vec<Point> = out.iter().map(|v| v.pos).collect();
    for (v, n) in out.iter_mut().zip(neighbor_counts(&positions, c.neighbor_radius_m)) {
        v.neighbors = n;
    }
    (occupied, out)
}

fn on_hash(vehicles: &[Vehicle], cell: f64) -> SpatialHash {
    SpatialHash::build(cell, vehicles.iter().filter(|v| v.on).map(|v| (v.spot, v.pos)))
}

/// One search: parked cars toss every control period using the broadcast
/// `π`, a pedestrian walks from a random street point, and the run stops at
/// the first tick the pedestrian is within reach of an on car, or at the
/// timeout. Without a pedestrian the loop runs to the horizon.
pub fn run_search(s: &SearchScenario, sim_seed: u64, opts: &SearchOptions) -> Result<SearchRun> {
    let c = &s.config;
    let city = &*s.city;
    let b = &c.behavior;
    let period = c.control_period_ticks().max(1);
    let ticks = c.ticks();
    let (occupied, mut vehicles) = populate(s, sim_seed);
    let base_counts: Vec<u32> = vehicles.iter().map(|v| v.neighbors).collect();
    let mut streams: Vec<Stream> = vehicles.iter().map(|v| rng::agent_stream(sim_seed, v.spot as u64)).collect();

    let gains = c.controller.gains();
    let state = if c.controller.allow_unstable { ControllerState::allow_unstable(gains)? } else { ControllerState::new(gains)? };
    let mut broadcaster = Broadcaster::new(state, c.controller.pi_min, c.controller.pi_max)?;
    let mut pi = c.controller.pi0;
    let mut history: VecDeque<f64> = VecDeque::with_capacity(c.filter.memory());
    let mut record = LoopRecord::with_capacity(ticks / period + 1);
    let n_track = opts.track_vehicles.min(vehicles.len());
    let mut tracked: Vec<(u32, Vec<f64>)> = vehicles[..n_track].iter().map(|v| (v.spot, Vec::new())).collect();

    let mut walker = c.pedestrian.then(|| Pedestrian::spawn(city, c.ped_speed_mps, rng::stream(sim_seed, Domain::Pedestrian, 0)));
    let mut hash = SpatialHash::new(c.rfid_radius_m);
    let mut env_segment: Option<usize> = None;
    let mut counts = base_counts.clone();

    for t in 0..=ticks {
        if t > 0 {
            if let Some(w) = &mut walker {
                w.step(city, c.tick_s);
            }
        }
        if t % period == 0 {
            let k = t / period;
            if k > 0 {
                for class in [Class::Few, Class::Some, Class::Many] {
                    let p = b.p_on(class, pi);
                    if p.min(1.0 - p) < c.floor {
                        return Err(Error::FloorViolation { value: p.min(1.0 - p), floor: c.floor });
                    }
                }
                if let Some(seg) = c.segment_ticks().filter(|s| *s > 0) {
                    let current = t / seg;
                    if env_segment != Some(current) {
                        let mut r = rng::stream(sim_seed, Domain::Environment, current as u64);
                        counts = apply_environment_perturbation(&base_counts, c.environment.delta, &mut r);
                        env_segment = Some(current);
                    }
                }
                let toss = |(v, (st, n)): (&mut Vehicle, (&mut Stream, &u32))| {
                    v.on = classify_and_toss(*n, pi, b, rng::unit(st));
                };
                if vehicles.len() >= PARALLEL_VEHICLES {
                    vehicles.par_iter_mut().zip(streams.par_iter_mut().zip(counts.par_iter())).for_each(toss);
                } else {
                    vehicles.iter_mut().zip(streams.iter_mut().zip(counts.iter())).for_each(toss);
                }
            }
            let y = vehicles.iter().filter(|v| v.on).count() as f64;
            if history.len() == c.filter.memory() {
                history.pop_front();
            }
            history.push_back(y);
            let y_hat = filter_step(&c.filter, history.make_contiguous())?;
            let e = c.r_target - y_hat;
            record.push(k, y, y_hat, e, pi);
            for (i, (_, h)) in tracked.iter_mut().enumerate() {
                h.push(if vehicles[i].on { 1.0 } else { 0.0 });
            }
            pi = broadcaster.update(e)?;
            if walker.is_some() {
                hash = on_hash(&vehicles, c.rfid_radius_m);
            }
        }
        if let Some(w) = &walker {
            if let Some(id) = hash.first_within(w.position(city), c.rfid_radius_m) {
                let outcome = SearchOutcome { detected: true, detection_time_s: Some(t as f64 * c.tick_s), detector: Some(id) };
                return Ok(SearchRun { outcome, record, occupied, participants: vehicles.len(), tracked });
            }
        }
    }
    let outcome = SearchOutcome { detected: false, detection_time_s: None, detector: None };
    Ok(SearchRun { outcome, record, occupied, participants: vehicles.len(), tracked })
}

/// How tightly a run held the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regulation {
    /// First epoch time at which `y` is within ±10% of the target.
    pub settle_s: Option<f64>,
    /// Mean `y` over the last `window_s` seconds.
    pub final_mean: f64,
    pub final_rel_error: f64,
}

pub fn regulation(record: &LoopRecord, r_target: f64, period_s: f64, window_s: f64) -> Option<Regulation> {
    let last = *record.k.last()?;
    let settle_s = record.first_entry(r_target, 0.1).map(|k| k as f64 * period_s);
    let from = last.saturating_sub((window_s / period_s).round() as usize) + 1;
    let final_mean = record.mean_y_from(from.min(last))?;
    Some(Regulation { settle_s, final_mean, final_rel_error: (final_mean - r_target).abs() / r_target })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;

    fn small(f: impl FnOnce(&mut ScenarioConfig)) -> SearchScenario {
        let mut c = preset("small").unwrap();
        f(&mut c);
        SearchScenario::new(c).unwrap()
    }

    #[test]
    fn detection_disk_is_closed() {
        let v = Vehicle { spot: 0, pos: Point::new(0.0, 0.0), on: true, neighbors: 0 };
        assert!(detect(&v, Point::new(6.0, 0.0), 6.0));
        assert!(!detect(&v, Point::new(6.0 + 1e-9, 0.0), 6.0));
        assert!(!detect(&Vehicle { on: false, ..v }, Point::new(0.0, 0.0), 6.0));
    }

    #[test]
    fn deterministic_per_seed() {
        let s = small(|_| {});
        let a = run_search(&s, 11, &SearchOptions::default()).unwrap();
        let b = run_search(&s, 11, &SearchOptions::default()).unwrap();
        assert_eq!(a.outcome, b.outcome);
        assert_eq!(a.record, b.record);
        assert_eq!(a.outcome.detected, a.outcome.detection_time_s.is_some());
    }

    #[test]
    fn occupancy_and_participation_counts() {
        let s = small(|c| c.pedestrian = false);
        let run = run_search(&s, 1, &SearchOptions::default()).unwrap();
        let n = s.config.spots as f64;
        assert!((run.occupied as f64 - 0.5 * n).abs() < 4.0 * (0.25 * n).sqrt(), "{}", run.occupied);
        assert_eq!(run.participants, run.occupied);
        // initial on fraction 0.3 of the parked cars
        let y0 = run.record.y[0];
        assert!((y0 - 0.3 * run.occupied as f64).abs() < 4.0 * (0.21 * run.occupied as f64).sqrt(), "{y0}");
        assert_eq!(run.record.len(), s.config.ticks() / s.config.control_period_ticks() + 1);

        let half = small(|c| {
            c.pedestrian = false;
            c.city.participation = 0.5;
        });
        let r = run_search(&half, 1, &SearchOptions::default()).unwrap();
        assert_eq!(r.occupied, run.occupied);
        assert!(r.participants < run.participants);
    }

    #[test]
    fn regulation_on_small_preset() {
        let s = small(|c| c.pedestrian = false);
        let run = run_search(&s, 3, &SearchOptions { track_vehicles: 5 }).unwrap();
        let reg = regulation(&run.record, s.config.r_target, s.config.control_period_s, 600.0).unwrap();
        assert!(reg.final_rel_error < 0.05, "{reg:?}");
        assert!(reg.settle_s.unwrap() <= 300.0, "{reg:?}");
        assert_eq!(run.tracked.len(), 5);
        assert!(run.tracked.iter().all(|(_, h)| h.len() == run.record.len()));
    }

    #[test]
    fn environment_offsets_change_the_run() {
        let base = run_search(&small(|c| c.pedestrian = false), 2, &SearchOptions::default()).unwrap();
        let env = small(|c| {
            c.pedestrian = false;
            c.environment.delta = 3;
            c.environment.segment_s = 300.0;
        });
        let pert = run_search(&env, 2, &SearchOptions::default()).unwrap();
        assert_eq!(base.record.y[0], pert.record.y[0]);
        assert_ne!(base.record.y, pert.record.y);
    }
}
