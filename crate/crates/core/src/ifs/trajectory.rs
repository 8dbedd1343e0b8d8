use rand::Rng;

use crate::error::{Error, Result};
use crate::ifs::{State, StateDependentIfs};
use crate::rng;

/// A realised path `x(0..=K)` with the map indices and signals that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    states: Vec<State>,
    indices: Vec<usize>,
    signals: Vec<f64>,
}

impl Trajectory {
    pub fn start(x0: State) -> Self {
        Self { states: vec![x0], indices: Vec::new(), signals: Vec::new() }
    }

    pub fn push(&mut self, signal: f64, sigma: usize, next: State) {
        self.signals.push(signal);
        self.indices.push(sigma);
        self.states.push(next);
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn signals(&self) -> &[f64] {
        &self.signals
    }

    /// Number of transitions.
    pub fn steps(&self) -> usize {
        self.indices.len()
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory always holds x(0)")
    }

    /// Coordinate `c` of every state.
    pub fn coordinate(&self, c: usize) -> Vec<f64> {
        self.states.iter().map(|x| x[c]).collect()
    }

    /// Replays the recorded indices through the maps from `x(0)`.
    pub fn replay(&self, ifs: &StateDependentIfs) -> Result<Vec<State>> {
        let mut x = self.states[0].clone();
        let mut out = Vec::with_capacity(self.states.len());
        out.push(x.clone());
        for &sigma in &self.indices {
            let map = ifs.maps().get(sigma).ok_or(Error::Dimension { expected: ifs.len(), got: sigma + 1 })?;
            x = map.apply(&x);
            out.push(x.clone());
        }
        Ok(out)
    }
}

/// Runs `steps` transitions of `ifs` from `x0` under `signals[k]`, drawing one
/// `q` per step from `stream`.
pub fn simulate_trajectory<R: Rng + ?Sized>(
    ifs: &StateDependentIfs,
    x0: State,
    steps: usize,
    signals: &[f64],
    stream: &mut R,
) -> Result<Trajectory> {
    if signals.len() < steps {
        return Err(Error::Precondition(format!(
            "signal sequence has {} entries for {steps} steps",
            signals.len()
        )));
    }
    let mut traj = Trajectory::start(x0);
    for &signal in &signals[..steps] {
        let (next, sigma) = ifs.step(traj.last(), signal, rng::unit(stream))?;
        traj.push(signal, sigma, next);
    }
    Ok(traj)
}
