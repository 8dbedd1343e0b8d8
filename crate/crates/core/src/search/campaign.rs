use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;

use crate::control::LoopRecord;
use crate::csvio;
use crate::error::{Error, Result};
use crate::rng::{self, Domain};
use crate::search::{run_search, SearchOptions, SearchScenario};

pub const CAMPAIGN_SCHEMA: &str = "fairsense-campaign/v1";
const COLUMNS: [&str; 4] = ["sim_id", "seed", "detected", "detection_time_s"];

#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub sim_id: usize,
    pub seed: u64,
    pub detected: bool,
    pub detection_time_s: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Campaign {
    pub sims: Vec<SimRecord>,
    /// Per-simulation loop records, same order as `sims`.
    pub loops: Vec<LoopRecord>,
}

/// Seed of simulation `sim_id` under a campaign seed.
pub fn sim_seed(master: u64, sim_id: usize) -> u64 {
    rng::derive_seed(master, sim_id as u64)
}

/// Independent searches, run in parallel; output order is by `sim_id`.
pub fn run_campaign(s: &SearchScenario, n_sims: usize, master_seed: u64) -> Result<Campaign> {
    let runs: Vec<(SimRecord, LoopRecord)> = (0..n_sims)
        .into_par_iter()
        .map(|id| {
            let seed = sim_seed(master_seed, id);
            let run = run_search(s, seed, &SearchOptions::default())?;
            Ok((
                SimRecord { sim_id: id, seed, detected: run.outcome.detected, detection_time_s: run.outcome.detection_time_s },
                run.record,
            ))
        })
        .collect::<Result<_>>()?;
    let (sims, loops) = runs.into_iter().unzip();
    Ok(Campaign { sims, loops })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignSummary {
    pub n_sims: usize,
    pub failures: usize,
    pub failure_rate: Interval,
    /// Over detected runs only; absent when nothing was found.
    pub mean_detection_s: Option<Interval>,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let i = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[i]
}

/// Point estimates with 95% percentile-bootstrap intervals over simulations.
pub fn summarize(sims: &[SimRecord], resamples: usize, seed: u64) -> Result<CampaignSummary> {
    if sims.is_empty() {
        return Err(Error::Precondition("campaign has no simulations".into()));
    }
    if resamples == 0 {
        return Err(Error::Precondition("need at least one bootstrap resample".into()));
    }
    let n = sims.len();
    let stat = |idx: &mut dyn Iterator<Item = usize>| {
        let (mut fail, mut sum, mut hits) = (0usize, 0.0, 0usize);
        for i in idx {
            match sims[i].detection_time_s {
                Some(t) if sims[i].detected => {
                    sum += t;
                    hits += 1;
                }
                _ => fail += 1,
            }
        }
        (fail as f64 / n as f64, (hits > 0).then(|| sum / hits as f64))
    };
    let (rate, mean) = stat(&mut (0..n));
    let mut r = rng::stream(seed, Domain::Bootstrap, 0);
    let mut rates = Vec::with_capacity(resamples);
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let draws: Vec<usize> = (0..n).map(|_| r.random_range(0..n)).collect();
        let (fr, m) = stat(&mut draws.into_iter());
        rates.push(fr);
        if let Some(m) = m {
            means.push(m);
        }
    }
    rates.sort_by(f64::total_cmp);
    means.sort_by(f64::total_cmp);
    let ci = |est: f64, v: &[f64]| Interval { estimate: est, lo: percentile(v, 0.025), hi: percentile(v, 0.975) };
    Ok(CampaignSummary {
        n_sims: n,
        failures: sims.iter().filter(|s| !s.detected).count(),
        failure_rate: ci(rate, &rates),
        mean_detection_s: mean.map(|m| ci(m, &means)),
    })
}

pub fn write_campaign_csv<W: Write>(out: W, sims: &[SimRecord]) -> Result<()> {
    let mut w = csvio::writer(out, CAMPAIGN_SCHEMA)?;
    w.write_record(COLUMNS)?;
    for s in sims {
        let t = s.detection_time_s.map(|t| t.to_string()).unwrap_or_default();
        w.write_record(&[s.sim_id.to_string(), s.seed.to_string(), s.detected.to_string(), t])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_campaign_csv<R: Read>(input: R) -> Result<Vec<SimRecord>> {
    let mut r = csvio::reader(input);
    csvio::expect_header(r.headers()?, &COLUMNS)?;
    let mut out = Vec::new();
    for (row, line) in r.records().enumerate() {
        let line = line?;
        if line.len() != COLUMNS.len() {
            return Err(Error::Schema(format!("row {}: expected {} fields, found {}", row + 1, COLUMNS.len(), line.len())));
        }
        let bad = |col: &str, v: &str| Error::Schema(format!("row {}, column {col:?}: cannot parse {v:?}", row + 1));
        let sim_id = line[0].parse::<usize>().map_err(|_| bad("sim_id", &line[0]))?;
        let seed = line[1].parse::<u64>().map_err(|_| bad("seed", &line[1]))?;
        let detected = line[2].parse::<bool>().map_err(|_| bad("detected", &line[2]))?;
        let detection_time_s = match (&line[3], detected) {
            ("", false) => None,
            (v, true) if !v.is_empty() => {
                let t = v.parse::<f64>().map_err(|_| bad("detection_time_s", v))?;
                if !(t.is_finite() && t >= 0.0) {
                    return Err(bad("detection_time_s", v));
                }
                Some(t)
            }
            _ => {
                return Err(Error::Schema(format!(
                    "row {}, column \"detection_time_s\": must be present exactly when detected is true",
                    row + 1
                )))
            }
        };
        out.push(SimRecord { sim_id, seed, detected, detection_time_s });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: usize, t: Option<f64>) -> SimRecord {
        SimRecord { sim_id: id, seed: id as u64 * 10, detected: t.is_some(), detection_time_s: t }
    }

    #[test]
    fn csv_round_trip() {
        let sims = vec![rec(0, Some(12.0)), rec(1, None), rec(2, Some(1799.0))];
        let mut buf = Vec::new();
        write_campaign_csv(&mut buf, &sims).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# fairsense-campaign/v1\nsim_id,seed,detected,detection_time_s\n0,0,true,12\n1,10,false,\n"));
        assert_eq!(read_campaign_csv(&buf[..]).unwrap(), sims);
    }

    #[test]
    fn csv_rejects_inconsistent_rows() {
        let head = "sim_id,seed,detected,detection_time_s\n";
        assert!(read_campaign_csv(format!("{head}0,1,true,\n").as_bytes()).is_err());
        assert!(read_campaign_csv(format!("{head}0,1,false,3\n").as_bytes()).is_err());
        assert!(read_campaign_csv(format!("{head}0,1,maybe,3\n").as_bytes()).unwrap_err().to_string().contains("detected"));
        assert!(read_campaign_csv("sim,seed,detected,detection_time_s\n".as_bytes()).is_err());
    }

    #[test]
    fn summary_statistics() {
        let sims: Vec<SimRecord> = (0..20).map(|i| rec(i, (i % 4 != 0).then_some(i as f64))).collect();
        let s = summarize(&sims, 500, 1).unwrap();
        assert_eq!(s.failures, 5);
        assert_eq!(s.failure_rate.estimate, 0.25);
        assert!(s.failure_rate.lo <= 0.25 && s.failure_rate.hi >= 0.25);
        let hits: Vec<f64> = (0..20).filter(|i| i % 4 != 0).map(|i| i as f64).collect();
        let m = s.mean_detection_s.unwrap();
        assert!((m.estimate - hits.iter().sum::<f64>() / hits.len() as f64).abs() < 1e-12);
        assert!(m.lo < m.estimate && m.estimate < m.hi);
        assert!(summarize(&[rec(0, None)], 10, 1).unwrap().mean_detection_s.is_none());
    }
}
