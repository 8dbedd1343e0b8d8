use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod analyze;
mod generate;
mod manifest;
mod simulate;

/// Closed-loop social sensing: search campaigns, config validation and
/// fairness / predictability / perturbation / coupling analysis.
///
/// Every flag can also be set through the environment variable shown in
/// its help text (command-line flags win).
#[derive(Parser, Debug)]
#[command(name = "fairsense", version, about, long_about = None)]
struct Cli {
    /// Worker threads for parallel simulation (default: all cores).
    #[arg(long, global = true, env = "FAIRSENSE_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a search campaign and write CSVs plus a manifest.
    Simulate(SimulateArgs),
    /// Check a resolved configuration against the convergence preconditions.
    Validate(ScenarioArgs),
    /// Post-process recorded runs.
    Analyze {
        #[command(subcommand)]
        mode: analyze::Mode,
    },
    /// Write synthetic inputs: the street layout, invariant-measure samples,
    /// on/off populations and coupled trajectory pairs.
    Generate {
        #[command(subcommand)]
        what: generate::What,
    },
}

/// Layered scenario configuration: preset, then file, then `--set`.
#[derive(Args, Debug, Clone)]
pub struct ScenarioArgs {
    /// Starting preset: melbourne-scale, regulation-only or small.
    #[arg(long, env = "FAIRSENSE_PRESET")]
    pub preset: Option<String>,
    /// TOML config file layered over the preset.
    #[arg(long, env = "FAIRSENSE_CONFIG")]
    pub config: Option<PathBuf>,
    /// Override one key, e.g. `--set controller.kappa=0.2`. Repeatable; the
    /// environment form separates overrides with ';'.
    #[arg(long = "set", value_name = "KEY=VALUE", env = "FAIRSENSE_SET", value_delimiter = ';')]
    pub set: Vec<String>,
}

impl ScenarioArgs {
    pub fn resolve(&self, extra: &[String]) -> anyhow::Result<fairsense_core::config::ScenarioConfig> {
        let text = match &self.config {
            Some(p) => Some(std::fs::read_to_string(p).map_err(|e| anyhow::anyhow!("reading {}: {e}", p.display()))?),
            None => None,
        };
        let mut overrides = self.set.clone();
        overrides.extend_from_slice(extra);
        Ok(fairsense_core::config::resolve(self.preset.as_deref(), text.as_deref(), &overrides)?)
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Campaign seed (overrides `seed` in the config).
    #[arg(long, env = "FAIRSENSE_SEED")]
    pub seed: Option<u64>,
    /// Number of simulations (overrides `n_sims`).
    #[arg(long, env = "FAIRSENSE_SIMS")]
    pub sims: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "fairsense-out", env = "FAIRSENSE_OUT")]
    pub out: PathBuf,
    /// Also write one loop CSV per simulation (always on without a pedestrian).
    #[arg(long, value_enum, default_value_t = LoopOutput::Auto)]
    pub loops: LoopOutput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LoopOutput {
    Auto,
    Always,
    Never,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Simulate(a) => simulate::run(&a),
        Command::Validate(a) => validate(&a),
        Command::Analyze { mode } => analyze::run(&mode),
        Command::Generate { what } => generate::run(&what),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn validate(a: &ScenarioArgs) -> anyhow::Result<ExitCode> {
    use fairsense_core::config::Severity;
    let config = a.resolve(&[])?;
    let checks = config.checks();
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| c.severity == Severity::Error).count();
    let warned = checks.iter().filter(|c| c.severity == Severity::Warning).count();
    println!("{} checks: {} failed, {} warnings", checks.len(), failed, warned);
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
