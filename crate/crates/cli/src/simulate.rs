use std::process::ExitCode;

use anyhow::Context;
use fairsense_core::control::write_loop_csv;
use fairsense_core::search::{regulation, run_campaign, summarize, write_campaign_csv, SearchScenario};

use crate::manifest::{self, RunManifest};
use crate::{LoopOutput, SimulateArgs};

const BOOTSTRAP_RESAMPLES: usize = 2_000;

pub fn run(a: &SimulateArgs) -> anyhow::Result<ExitCode> {
    let started_at = manifest::now();
    let mut extra = Vec::new();
    if let Some(s) = a.seed {
        extra.push(format!("seed={s}"));
    }
    if let Some(n) = a.sims {
        extra.push(format!("n_sims={n}"));
    }
    let config = a.scenario.resolve(&extra)?;
    let canonical = config.canonical()?;
    let scenario = SearchScenario::new(config)?;
    let c = &scenario.config;

    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let campaign = run_campaign(&scenario, c.n_sims, c.seed)?;

    let mut outputs = Vec::new();
    let mut csv = Vec::new();
    write_campaign_csv(&mut csv, &campaign.sims)?;
    manifest::write_atomic(&a.out.join("campaign.csv"), &csv)?;
    outputs.push("campaign.csv".to_string());

    let write_loops = match a.loops {
        LoopOutput::Always => true,
        LoopOutput::Never => false,
        LoopOutput::Auto => !c.pedestrian,
    };
    if write_loops {
        std::fs::create_dir_all(a.out.join("loops"))?;
        for (s, rec) in campaign.sims.iter().zip(&campaign.loops) {
            let name = format!("loops/sim_{:04}.csv", s.sim_id);
            let mut buf = Vec::new();
            write_loop_csv(&mut buf, rec)?;
            manifest::write_atomic(&a.out.join(&name), &buf)?;
            outputs.push(name);
        }
    }

    if c.pedestrian {
        let sum = summarize(&campaign.sims, BOOTSTRAP_RESAMPLES, c.seed)?;
        println!("simulations: {}", sum.n_sims);
        println!(
            "failed to detect: {} ({:.1}%, 95% CI {:.1}–{:.1}%)",
            sum.failures,
            100.0 * sum.failure_rate.estimate,
            100.0 * sum.failure_rate.lo,
            100.0 * sum.failure_rate.hi
        );
        match sum.mean_detection_s {
            Some(m) => println!(
                "mean detection time: {:.1} s = {:.2} min (95% CI {:.2}–{:.2} min)",
                m.estimate,
                m.estimate / 60.0,
                m.lo / 60.0,
                m.hi / 60.0
            ),
            None => println!("mean detection time: n/a (no detections)"),
        }
    } else {
        let regs: Vec<_> = campaign
            .loops
            .iter()
            .filter_map(|r| regulation(r, c.r_target, c.control_period_s, 600.0))
            .collect();
        let settled: Vec<f64> = regs.iter().filter_map(|r| r.settle_s).collect();
        let worst = regs.iter().map(|r| r.final_rel_error).fold(0.0, f64::max);
        println!("simulations: {}", regs.len());
        println!("settled (±10%): {}/{}; latest settling {:.0} s", settled.len(), regs.len(), settled.iter().copied().fold(0.0, f64::max));
        println!("final 10 min mean, worst relative error: {:.2}%", 100.0 * worst);
    }

    let m = RunManifest {
        artifact_version: manifest::ARTIFACT_VERSION.into(),
        config_hash: manifest::config_hash(&canonical),
        master_seed: c.seed,
        n_sims: c.n_sims,
        started_at,
        finished_at: manifest::now(),
        outputs,
        config: canonical,
    };
    m.write(&a.out.join("manifest.json"))?;
    println!("wrote {}", a.out.display());
    Ok(ExitCode::SUCCESS)
}
