use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Subcommand, ValueEnum};
use fairsense_core::fairness::write_trajectory_csv;
use fairsense_core::ifs::{
    on_off_maps, simulate_trajectory, AffineMap, Norm, ProbabilityFn, ProbabilityVector, State,
    StateDependentIfs, Trajectory, TwoStateSwitching,
};
use fairsense_core::measure::{default_burn_in, empirical_invariant, write_empirical_csv};
use fairsense_core::rng::{self, Domain};
use fairsense_core::search::generate_city;

use crate::manifest::write_atomic;
use crate::ScenarioArgs;

#[derive(Subcommand, Debug)]
pub enum What {
    /// Parking bay positions of the resolved scenario (`spot,x,y`).
    Layout {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Chaos-game samples of a scalar IFS's invariant measure.
    Invariant {
        /// Map `x ↦ a·x + b` given as `a,b`. Repeat once per map.
        #[arg(long = "map", required = true, allow_hyphen_values = true)]
        maps: Vec<String>,
        /// Comma-separated selection probabilities, one per map.
        #[arg(long, value_delimiter = ',', required = true)]
        probs: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Defaults to enough steps to forget the start to 1e-9.
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long, default_value_t = 1)]
        thinning: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// On/off agents, optionally with state-dependent switching, as a trajectory CSV.
    Population {
        #[arg(long, default_value_t = 20)]
        agents: usize,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        /// Probability of switching (or staying) on. A list assigns classes
        /// round-robin across agents.
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        p_on: Vec<f64>,
        /// With this, agents switch off from on with this probability
        /// instead of using `p_on` in both states.
        #[arg(long, value_delimiter = ',')]
        p_off: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = Initial::Off)]
        initial: Initial,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Two trajectories of a scalar IFS driven by the same map indices.
    Coupled {
        #[arg(long = "map", required = true, allow_hyphen_values = true)]
        maps: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        probs: Vec<f64>,
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, allow_hyphen_values = true)]
        y0: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Initial {
    Off,
    On,
    Alternate,
    Random,
}

pub fn parse_map(s: &str) -> anyhow::Result<AffineMap> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b] = parts.as_slice() else {
        bail!("map {s:?} must be `a,b` for x -> a*x + b");
    };
    let a: f64 = a.parse().with_context(|| format!("map {s:?}: bad slope"))?;
    let b: f64 = b.parse().with_context(|| format!("map {s:?}: bad offset"))?;
    Ok(AffineMap::scalar(a, b)?)
}

fn scalar_ifs(maps: &[String], probs: &[f64]) -> anyhow::Result<StateDependentIfs> {
    let maps: Vec<AffineMap> = maps.iter().map(|m| parse_map(m)).collect::<anyhow::Result<_>>()?;
    if maps.len() != probs.len() {
        bail!("{} maps but {} probabilities", maps.len(), probs.len());
    }
    Ok(StateDependentIfs::constant(maps, ProbabilityVector::new(probs.to_vec())?)?)
}

pub fn run(what: &What) -> anyhow::Result<ExitCode> {
    match what {
        What::Layout { scenario, out } => {
            let c = scenario.resolve(&[])?;
            let city = generate_city(&c.city, c.spots)?;
            let mut buf = Vec::new();
            writeln!(buf, "# fairsense-layout/v1")?;
            writeln!(buf, "spot,x,y")?;
            for (i, p) in city.spots.iter().enumerate() {
                writeln!(buf, "{i},{},{}", p.x, p.y)?;
            }
            write_atomic(out, &buf)?;
            eprintln!("{} bays on {} of {} blocks", city.spots.len(), city.lined_segments, city.segments().len());
        }
        What::Invariant { maps, probs, samples, burn_in, thinning, x0, seed, out } => {
            let ifs = scalar_ifs(maps, probs)?;
            let r = ifs.max_operator_norm(Norm::Euclidean);
            let burn_in = match burn_in {
                Some(b) => *b,
                None => default_burn_in(r)?,
            };
            let m = empirical_invariant(&ifs, &State::from_element(1, *x0), 0.0, burn_in, *samples, *thinning, *seed)?;
            let mut buf = Vec::new();
            write_empirical_csv(&mut buf, &m)?;
            write_atomic(out, &buf)?;
            eprintln!("{samples} samples after {burn_in} burn-in steps, mean {:.6}", m.mean()[0]);
        }
        What::Population { agents, steps, p_on, p_off, initial, seed, out } => {
            if *agents == 0 || p_on.is_empty() {
                bail!("need at least one agent and one p_on value");
            }
            let classes: Vec<Arc<StateDependentIfs>> = match p_off {
                None => p_on
                    .iter()
                    .map(|p| Ok(Arc::new(StateDependentIfs::constant(on_off_maps(), ProbabilityVector::on_off(*p)?)?)))
                    .collect::<anyhow::Result<_>>()?,
                Some(off) => {
                    if off.len() != p_on.len() {
                        bail!("--p-off needs one value per --p-on value");
                    }
                    p_on.iter()
                        .zip(off)
                        .map(|(on, off)| {
                            let f: Arc<dyn ProbabilityFn> = Arc::new(TwoStateSwitching { on_rate: *on, off_rate: *off });
                            // reject out-of-range rates up front
                            f.evaluate(&State::from_element(1, 0.0), 0.0)?;
                            f.evaluate(&State::from_element(1, 1.0), 0.0)?;
                            Ok(Arc::new(StateDependentIfs::new(on_off_maps(), f)?))
                        })
                        .collect::<anyhow::Result<_>>()?
                }
            };
            let mut init = rng::stream(*seed, Domain::InitialState, 0);
            let signals = vec![0.0; *steps];
            let trajs: Vec<Trajectory> = (0..*agents)
                .map(|i| {
                    let x0 = match initial {
                        Initial::Off => 0.0,
                        Initial::On => 1.0,
                        Initial::Alternate => (i % 2) as f64,
                        Initial::Random => (rng::unit(&mut init) < 0.5) as u8 as f64,
                    };
                    let ifs = &classes[i % classes.len()];
                    Ok(simulate_trajectory(ifs, State::from_element(1, x0), *steps, &signals, &mut rng::agent_stream(*seed, i as u64))?)
                })
                .collect::<anyhow::Result<_>>()?;
            let pairs: Vec<(u64, &Trajectory)> = trajs.iter().enumerate().map(|(i, t)| (i as u64, t)).collect();
            let mut buf = Vec::new();
            write_trajectory_csv(&mut buf, &pairs)?;
            write_atomic(out, &buf)?;
            eprintln!("{agents} agents, {steps} steps");
        }
        What::Coupled { maps, probs, x0, y0, steps, seed, out } => {
            let ifs = scalar_ifs(maps, probs)?;
            let mut stream = rng::stream(*seed, Domain::Misc, 0);
            let x = simulate_trajectory(&ifs, State::from_element(1, *x0), *steps, &vec![0.0; *steps], &mut stream)?;
            let mut y = Trajectory::start(State::from_element(1, *y0));
            for &sigma in x.indices() {
                let next = ifs.maps()[sigma].apply(y.last());
                y.push(0.0, sigma, next);
            }
            let mut buf = Vec::new();
            write_trajectory_csv(&mut buf, &[(0, &x), (1, &y)])?;
            write_atomic(out, &buf)?;
            eprintln!("lambda = {}", ifs.max_operator_norm(Norm::Euclidean));
        }
    }
    Ok(ExitCode::SUCCESS)
}
