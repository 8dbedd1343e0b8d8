use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ifs::probability::{sample_index, ConstantProbabilities, ProbabilityFn, ProbabilityVector};
use crate::ifs::{AffineMap, Norm, State};

/// States and broadcast signals on which a probability function is spot-checked.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    pub states: Vec<State>,
    pub signals: Vec<f64>,
}

impl SampleGrid {
    /// Evenly spaced scalar states on `[lo, hi]` for each of `signals`.
    pub fn scalar(lo: f64, hi: f64, points: usize, signals: Vec<f64>) -> Self {
        let points = points.max(2);
        let states = (0..points)
            .map(|i| State::from_element(1, lo + (hi - lo) * i as f64 / (points - 1) as f64))
            .collect();
        Self { states, signals }
    }
}

/// An iterated function system with state- and signal-dependent probabilities.
#[derive(Debug, Clone)]
pub struct StateDependentIfs {
    maps: Vec<AffineMap>,
    probabilities: Arc<dyn ProbabilityFn>,
    floor: Option<f64>,
}

impl StateDependentIfs {
    /// Builds the system and spot-checks the probability function at the
    /// fixed points of the maps (signal 0).
    pub fn new(maps: Vec<AffineMap>, probabilities: Arc<dyn ProbabilityFn>) -> Result<Self> {
        let Some(first) = maps.first() else {
            return Err(Error::Precondition("an IFS needs at least one map".into()));
        };
        let n = first.dim();
        if let Some(m) = maps.iter().find(|m| m.dim() != n) {
            return Err(Error::Dimension { expected: n, got: m.dim() });
        }
        if probabilities.len() != maps.len() {
            return Err(Error::Dimension { expected: maps.len(), got: probabilities.len() });
        }
        let ifs = Self { maps, probabilities, floor: None };
        let mut probe = vec![State::zeros(n)];
        probe.extend(ifs.maps.iter().filter_map(fixed_point));
        for x in &probe {
            ifs.probabilities(x, 0.0)?;
        }
        Ok(ifs)
    }

    /// Convenience constructor with state-independent probabilities.
    pub fn constant(maps: Vec<AffineMap>, p: ProbabilityVector) -> Result<Self> {
        Self::new(maps, Arc::new(ConstantProbabilities(p)))
    }

    /// Every probability vector produced by this system must respect `floor`.
    pub fn certified(mut self, floor: f64) -> Self {
        self.floor = Some(floor);
        self
    }

    pub fn floor(&self) -> Option<f64> {
        self.floor
    }

    /// Evaluates probabilities at every grid point; fails on the first invalid vector.
    pub fn check_grid(&self, grid: &SampleGrid) -> Result<()> {
        for x in &grid.states {
            for &s in &grid.signals {
                self.probabilities(x, s)?;
            }
        }
        Ok(())
    }

    /// Largest `‖p(x) − p(y)‖₁ / ‖x − y‖` between consecutive grid states.
    pub fn lipschitz_on_grid(&self, grid: &SampleGrid, norm: Norm) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &s in &grid.signals {
            for pair in grid.states.windows(2) {
                let d = norm.distance(&pair[0], &pair[1]);
                if d == 0.0 {
                    continue;
                }
                let a = self.probabilities(&pair[0], s)?;
                let b = self.probabilities(&pair[1], s)?;
                worst = worst.max(a.l1_distance(&b) / d);
            }
        }
        Ok(worst)
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn probability_fn(&self) -> &Arc<dyn ProbabilityFn> {
        &self.probabilities
    }

    pub fn probabilities(&self, x: &State, signal: f64) -> Result<ProbabilityVector> {
        let p = self.probabilities.evaluate(x, signal)?;
        if p.len() != self.maps.len() {
            return Err(Error::Dimension { expected: self.maps.len(), got: p.len() });
        }
        if let Some(floor) = self.floor {
            p.check_floor(floor)?;
        }
        Ok(p)
    }

    /// `λ̂`: the largest induced operator norm over the maps.
    pub fn max_operator_norm(&self, norm: Norm) -> f64 {
        self.maps.iter().map(|m| m.lipschitz(norm)).fold(0.0, f64::max)
    }

    /// One step of the chain: pick `σ` from the bin holding `q`, apply `w_σ`.
    pub fn step(&self, x: &State, signal: f64, q: f64) -> Result<(State, usize)> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state"));
        }
        let p = self.probabilities(x, signal)?;
        let sigma = sample_index(&p, q)?;
        Ok((self.maps[sigma].apply(x), sigma))
    }

    /// One-step transition law from `x`: the pairs `(w_σ(x), p_σ(x, π))`,
    /// with coinciding images merged.
    pub fn transition_kernel(&self, x: &State, signal: f64) -> Result<Vec<(State, f64)>> {
        let p = self.probabilities(x, signal)?;
        let mut out: Vec<(State, f64)> = Vec::with_capacity(self.maps.len());
        for (map, &w) in self.maps.iter().zip(p.weights()) {
            let image = map.apply(x);
            match out.iter_mut().find(|(y, _)| *y == image) {
                Some((_, acc)) => *acc += w,
                None => out.push((image, w)),
            }
        }
        Ok(out)
    }
}

/// Fixed point `(I − A)⁻¹ b`; exists for every Schur `A`.
pub fn fixed_point(map: &AffineMap) -> Option<State> {
    let n = map.dim();
    let lhs = nalgebra::DMatrix::identity(n, n) - map.matrix();
    lhs.lu().solve(map.offset())
}

/// The two-map on/off agent `{x ↦ 0, x ↦ 1}`.
pub fn on_off_maps() -> Vec<AffineMap> {
    vec![AffineMap::constant(State::from_element(1, 0.0)), AffineMap::constant(State::from_element(1, 1.0))]
}
