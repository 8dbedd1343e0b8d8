use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;

use crate::control::{filter_step, Broadcaster, FilterSpec, LoopRecord};
use crate::error::{Error, Result};
use crate::ifs::probability::sample_index;
use crate::ifs::{State, StateDependentIfs, Trajectory};
use crate::rng::{self, Stream};

const PARALLEL_AGENTS: usize = 512;

/// One unit of the population: its dynamics (possibly switching at given
/// steps) and its initial state. `id` keys the agent's random stream.
#[derive(Debug, Clone)]
pub struct Agent {
    pub id: u64,
    pub x0: State,
    schedule: Vec<(usize, Arc<StateDependentIfs>)>,
}

impl Agent {
    pub fn new(id: u64, x0: State, ifs: Arc<StateDependentIfs>) -> Result<Self> {
        Self::segmented(id, x0, vec![(0, ifs)])
    }

    /// `schedule[s] = (start, ifs)`: dynamics `ifs` drive the transitions out of
    /// steps `start..next_start`. Starts must begin at 0 and increase.
    pub fn segmented(id: u64, x0: State, schedule: Vec<(usize, Arc<StateDependentIfs>)>) -> Result<Self> {
        match schedule.first() {
            Some((0, _)) => {}
            _ => return Err(Error::Precondition("segment schedule must start at step 0".into())),
        }
        if schedule.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Precondition("segment starts must be strictly increasing".into()));
        }
        if let Some((_, ifs)) = schedule.iter().find(|(_, ifs)| ifs.dim() != x0.len()) {
            return Err(Error::Dimension { expected: x0.len(), got: ifs.dim() });
        }
        Ok(Self { id, x0, schedule })
    }

    pub fn dynamics_at(&self, k: usize) -> &StateDependentIfs {
        let i = self.schedule.partition_point(|(start, _)| *start <= k) - 1;
        &self.schedule[i].1
    }
}

#[derive(Debug, Clone)]
pub enum ControlLaw {
    /// Open loop with a constant broadcast.
    Frozen(f64),
    /// Feedback from `e`, starting from broadcast `initial`.
    Feedback { broadcaster: Broadcaster, initial: f64 },
}

#[derive(Debug, Clone)]
pub struct LoopSettings {
    pub r_target: f64,
    /// Number of transitions; the record has `steps + 1` rows.
    pub steps: usize,
    /// Steps between controller updates; `π` is held in between.
    pub control_period: usize,
    pub filter: FilterSpec,
    pub law: ControlLaw,
    pub seed: u64,
    pub record_trajectories: bool,
    /// Coordinate summed into `y`.
    pub observe: usize,
}

#[derive(Debug, Clone)]
pub struct LoopRun {
    pub record: LoopRecord,
    /// One per agent when requested, otherwise empty.
    pub trajectories: Vec<Trajectory>,
    pub final_states: Vec<State>,
}

struct Unit<'a> {
    agent: &'a Agent,
    x: State,
    stream: Stream,
    trajectory: Option<Trajectory>,
}

impl Unit<'_> {
    fn advance(&mut self, k: usize, pi: f64) -> Result<()> {
        let ifs = self.agent.dynamics_at(k);
        let p = ifs.probabilities(&self.x, pi)?;
        let sigma = sample_index(&p, rng::unit(&mut self.stream))?;
        self.x = ifs.maps()[sigma].apply(&self.x);
        if let Some(t) = &mut self.trajectory {
            t.push(pi, sigma, self.x.clone());
        }
        Ok(())
    }
}

/// Simulates the population under the broadcast law.
///
/// At each step `k`: agents move from `x(k−1)` under the held `π`, then
/// `y(k) = Σ_i x_i(k)[observe]`, `ŷ(k)` is filtered, `e(k) = r_target − ŷ(k)`,
/// and every `control_period` steps the controller turns `e(k)` into the
/// broadcast for the following steps. Each agent draws from its own stream,
/// so results do not depend on scheduling.
pub fn run_closed_loop(agents: &[Agent], settings: &LoopSettings) -> Result<LoopRun> {
    if agents.is_empty() {
        return Err(Error::Precondition("population is empty".into()));
    }
    if settings.control_period == 0 {
        return Err(Error::Precondition("control period must be at least one step".into()));
    }
    settings.filter.validate()?;
    if let Some(a) = agents.iter().find(|a| settings.observe >= a.x0.len()) {
        return Err(Error::Dimension { expected: settings.observe + 1, got: a.x0.len() });
    }

    let mut units: Vec<Unit> = agents
        .iter()
        .map(|a| Unit {
            agent: a,
            x: a.x0.clone(),
            stream: rng::agent_stream(settings.seed, a.id),
            trajectory: settings.record_trajectories.then(|| Trajectory::start(a.x0.clone())),
        })
        .collect();

    let (mut pi, mut broadcaster) = match &settings.law {
        ControlLaw::Frozen(p) => (*p, None),
        ControlLaw::Feedback { broadcaster, initial } => (*initial, Some(*broadcaster)),
    };
    let mut history = VecDeque::with_capacity(settings.filter.memory());
    let mut record = LoopRecord::with_capacity(settings.steps + 1);

    for k in 0..=settings.steps {
        if k > 0 {
            if units.len() >= PARALLEL_AGENTS {
                units.par_iter_mut().try_for_each(|u| u.advance(k - 1, pi))?;
            } else {
                units.iter_mut().try_for_each(|u| u.advance(k - 1, pi))?;
            }
        }
        let y: f64 = units.iter().map(|u| u.x[settings.observe]).sum();
        if history.len() == settings.filter.memory() {
            history.pop_front();
        }
        history.push_back(y);
        let y_hat = filter_step(&settings.filter, history.make_contiguous())?;
        let e = settings.r_target - y_hat;
        record.push(k, y, y_hat, e, pi);
        if let Some(b) = &mut broadcaster {
            if (k + 1) % settings.control_period == 0 {
                pi = b.update(e)?;
            }
        }
    }

    let final_states = units.iter().map(|u| u.x.clone()).collect();
    let trajectories = units.into_iter().filter_map(|u| u.trajectory).collect();
    Ok(LoopRun { record, trajectories, final_states })
}
