use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::Subcommand;
use fairsense_core::fairness::{
    fairness_gap, predictability_report, read_trajectory_csv, segment_fairness, write_fairness_csv, AgentSeries,
    FairnessSummary, FairnessVector, GapNorm, DEFAULT_RESAMPLES,
};
use fairsense_core::ifs::coupling::{first_bound_violation, log_distance_slope};
use fairsense_core::ifs::Norm;
use fairsense_core::measure::{
    bootstrap_w1_se, perturbation_bound, read_measure_csv, wasserstein1_1d, wasserstein1_discrete, PerturbationBoundInputs,
    WeightedPoints,
};

#[derive(Subcommand, Debug)]
pub enum Mode {
    /// Per-agent long-run averages and the ε-fairness gap.
    Fairness {
        /// Trajectory CSV (agent_id,k,x0,…).
        #[arg(long)]
        input: PathBuf,
        /// State coordinate to average.
        #[arg(long, default_value_t = 0)]
        coordinate: usize,
        /// Steps dropped at the start of every segment.
        #[arg(long, default_value_t = 0)]
        burn_in: usize,
        #[arg(long, default_value_t = 0.02)]
        epsilon: f64,
        /// one, two or inf.
        #[arg(long, default_value = "inf")]
        norm: String,
        /// Comma-separated first step of each segment, starting with 0.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        segments: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
        resamples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fairness CSV destination (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Agreement of per-agent averages across initial conditions.
    Predictability {
        /// One trajectory CSV per initial condition; agent ids must match.
        #[arg(long, num_args = 1.., required = true)]
        input: Vec<PathBuf>,
        #[arg(long, default_value_t = 0)]
        coordinate: usize,
        #[arg(long, default_value_t = 0)]
        burn_in: usize,
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
        #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
        resamples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical W1 between two invariant-measure samples against the
    /// perturbation bound (r′·gap + β·η)/(1 − r).
    Perturbation {
        /// Measure CSV sampled from the original system.
        #[arg(long)]
        original: PathBuf,
        /// Measure CSV sampled from the perturbed system.
        #[arg(long)]
        perturbed: PathBuf,
        /// Contraction factor of the original system.
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        r_prime: f64,
        /// Probability-weighted map gap.
        #[arg(long, default_value_t = 0.0)]
        gap: f64,
        #[arg(long)]
        beta: f64,
        /// Probability perturbation.
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
        #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
        resamples: usize,
        /// Margin in bootstrap standard errors.
        #[arg(long, default_value_t = 3.0)]
        se_multiple: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Distance decay of a synchronously coupled trajectory pair.
    Coupling {
        /// Trajectory CSV holding exactly two agents driven by shared draws.
        #[arg(long)]
        input: PathBuf,
        /// Contraction bound λ̂ (largest operator norm of the linear parts).
        #[arg(long)]
        lambda: f64,
    },
}

fn open(p: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(p).with_context(|| format!("opening {}", p.display()))?))
}

fn trajectories(p: &Path) -> anyhow::Result<Vec<AgentSeries>> {
    read_trajectory_csv(open(p)?).with_context(|| format!("reading {}", p.display()))
}

fn measure(p: &Path) -> anyhow::Result<WeightedPoints> {
    read_measure_csv(open(p)?).with_context(|| format!("reading {}", p.display()))
}

fn coordinate(agents: &[AgentSeries], c: usize) -> anyhow::Result<Vec<Vec<f64>>> {
    agents
        .iter()
        .map(|a| {
            if a.states.first().is_some_and(|s| c >= s.len()) {
                bail!("agent {} has no coordinate {c}", a.agent_id);
            }
            Ok(a.coordinate(c))
        })
        .collect()
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(p) => crate::manifest::write_atomic(p, bytes),
        None => Ok(std::io::stdout().write_all(bytes)?),
    }
}

pub fn run(mode: &Mode) -> anyhow::Result<ExitCode> {
    match mode {
        Mode::Fairness { input, coordinate: c, burn_in, epsilon, norm, segments, resamples, seed, out } => {
            let norm = GapNorm::parse(norm)?;
            let agents = trajectories(input)?;
            let series = coordinate(&agents, *c)?;
            let segs = segment_fairness(&series, segments, *burn_in, *resamples, *seed)?;
            let gap = segs
                .iter()
                .map(|s| fairness_gap(&s.vector, &FairnessVector::population_mean(&s.vector), norm))
                .fold(0.0, f64::max);
            let summary = FairnessSummary { norm, gap, epsilon: *epsilon };
            let ids: Vec<u64> = agents.iter().map(|a| a.agent_id).collect();
            let vectors: Vec<_> = segs.iter().map(|s| &s.vector).collect();
            let mut buf = Vec::new();
            write_fairness_csv(&mut buf, &ids, &vectors, &summary)?;
            emit(out, &buf)?;
            for s in &segs {
                let flag = if s.short { " (shorter than burn-in: no samples dropped)" } else { "" };
                eprintln!(
                    "segment {}..{}: mean {:.4}, spread {:.4}{flag}",
                    s.start,
                    s.end,
                    s.vector.mean(),
                    s.vector.pairwise_spread()
                );
            }
            eprintln!("fairness gap ({}-norm) {gap:.4} vs epsilon {epsilon}: {}", norm.name(), summary.verdict());
        }
        Mode::Predictability { input, coordinate: c, burn_in, tolerance, resamples, seed, out } => {
            if input.len() < 2 {
                bail!("predictability needs at least two --input files (one per initial condition)");
            }
            let runs: Vec<Vec<AgentSeries>> = input.iter().map(|p| trajectories(p)).collect::<anyhow::Result<_>>()?;
            let ids: Vec<u64> = runs[0].iter().map(|a| a.agent_id).collect();
            for (p, run) in input.iter().zip(&runs) {
                let these: Vec<u64> = run.iter().map(|a| a.agent_id).collect();
                if these != ids {
                    bail!("{}: agent ids differ from {}", p.display(), input[0].display());
                }
            }
            let ensemble: Vec<Vec<Vec<f64>>> = runs.iter().map(|r| coordinate(r, *c)).collect::<anyhow::Result<_>>()?;
            let rep = predictability_report(&ensemble, None, *burn_in, *resamples, *seed)?;
            let verdict = if rep.holds(*tolerance) { "PASS" } else { "FAIL" };
            let mut buf = Vec::new();
            writeln!(buf, "# fairsense-predictability/v1")?;
            writeln!(buf, "agent_id,r_bar,ci_halfwidth,spread")?;
            for (i, id) in ids.iter().enumerate() {
                let est: Vec<f64> = rep.per_condition.iter().map(|v| v.r_bar[i]).collect();
                let spread = est.iter().copied().fold(f64::NEG_INFINITY, f64::max) - est.iter().copied().fold(f64::INFINITY, f64::min);
                writeln!(buf, "{id},{},{},{spread}", rep.pooled.r_bar[i], rep.pooled.ci_halfwidth[i])?;
            }
            writeln!(buf, "# summary conditions={} max_spread={} tolerance={tolerance} verdict={verdict}", runs.len(), rep.max_spread)?;
            emit(out, &buf)?;
            eprintln!("max spread across {} initial conditions: {:.4} (tolerance {tolerance}): {verdict}", runs.len(), rep.max_spread);
        }
        Mode::Perturbation { original, perturbed, r, r_prime, gap, beta, eta, resamples, se_multiple, seed } => {
            let inputs = PerturbationBoundInputs { r: *r, r_prime: *r_prime, weighted_map_gap: *gap, beta: *beta, eta: *eta };
            let bound = perturbation_bound(&inputs)?;
            let (mu, nu) = (measure(original)?, measure(perturbed)?);
            let uniform = |m: &WeightedPoints| m.weights.iter().all(|w| (w - m.weights[0]).abs() <= 1e-12 * m.weights[0].abs().max(1e-300));
            let (w1, se) = if mu.dim == 1 && nu.dim == 1 && uniform(&mu) && uniform(&nu) {
                let (a, b) = (mu.into_empirical()?, nu.into_empirical()?);
                (wasserstein1_1d(&a, &b)?, bootstrap_w1_se(&a, &b, *resamples, *seed)?)
            } else {
                eprintln!("weighted or multivariate input: exact transport, no bootstrap margin");
                (wasserstein1_discrete(&mu.into_discrete()?, &nu.into_discrete()?, Norm::Euclidean)?, 0.0)
            };
            let margin = se_multiple * se;
            let verdict = if w1 - margin <= bound { "PASS" } else { "FAIL" };
            println!("empirical W1: {w1:.6}");
            println!("bootstrap SE: {se:.6} (margin {margin:.6})");
            println!("bound: {bound:.6}");
            println!("verdict: {verdict} (bound >= empirical - margin)");
        }
        Mode::Coupling { input, lambda } => {
            if !(lambda.is_finite() && *lambda > 0.0) {
                bail!("--lambda must be positive, got {lambda}");
            }
            let agents = trajectories(input)?;
            let [x, y] = agents.as_slice() else {
                bail!("{}: expected exactly two agents, found {}", input.display(), agents.len());
            };
            if x.states.len() != y.states.len() {
                bail!("the two trajectories have different lengths ({} vs {})", x.states.len(), y.states.len());
            }
            let d: Vec<f64> = x.states.iter().zip(&y.states).map(|(a, b)| Norm::Euclidean.distance(a, b)).collect();
            let slope = log_distance_slope(&d);
            let violation = first_bound_violation(&d, *lambda, 1e-9);
            println!("steps: {}", d.len() - 1);
            println!("d(0) = {:e}, d(K) = {:e}", d[0], d[d.len() - 1]);
            match slope {
                Some(s) => println!("log-distance slope: {s:.6} (ln lambda = {:.6})", lambda.ln()),
                None => println!("log-distance slope: n/a (fewer than two positive distances)"),
            }
            match violation {
                Some(k) => println!("bound d(k) <= lambda^k d(0) first violated at k = {k}"),
                None => println!("bound d(k) <= lambda^k d(0) holds at every k"),
            }
            let ok = violation.is_none() && slope.is_none_or(|s| s <= lambda.ln() + 1e-9);
            println!("verdict: {}", if ok { "PASS" } else { "FAIL" });
        }
    }
    Ok(ExitCode::SUCCESS)
}
