use std::fmt;

use crate::error::{Error, Result};
use crate::ifs::State;

/// Absolute tolerance on `Σ p = 1`.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Default probability floor for ergodicity-certified loops.
pub const DEFAULT_FLOOR: f64 = 1e-3;

/// Selection probabilities over the maps of an IFS.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Probability("empty".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0 || **w > 1.0) {
            return Err(Error::Probability(format!("weight {w} outside [0, 1]")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Probability(format!("weights sum to {total}")));
        }
        Ok(Self(weights))
    }

    /// Normalizes non-negative weights.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Probability(format!("cannot normalize weights with sum {total}")));
        }
        let mut w: Vec<f64> = weights.into_iter().map(|w| w / total).collect();
        // push rounding residue onto the largest weight
        let residue = 1.0 - w.iter().sum::<f64>();
        if let Some(max) = w.iter_mut().max_by(|a, b| a.total_cmp(b)) {
            *max += residue;
        }
        Self::new(w)
    }

    pub fn uniform(n: usize) -> Self {
        Self::normalized(vec![1.0; n.max(1)]).expect("uniform weights")
    }

    /// `[1 - p_on, p_on]`, the off/on ordering used by on/off agents.
    pub fn on_off(p_on: f64) -> Result<Self> {
        Self::new(vec![1.0 - p_on, p_on])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn check_floor(&self, floor: f64) -> Result<()> {
        let m = self.min();
        if m < floor {
            return Err(Error::FloorViolation { value: m, floor });
        }
        Ok(())
    }

    /// `Σ |p_σ − p'_σ|`.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }
}

/// Picks the bin containing `q` when the weights are laid end to end on `[0, 1]`.
///
/// Bins are half-open `[lo, hi)`, and `q = 1` (or any `q` past the rounded
/// total) lands in the last bin with positive weight. Zero-width bins are
/// never selected.
pub fn sample_index(p: &ProbabilityVector, q: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain { value: q, lo: 0.0, hi: 1.0 });
    }
    let mut upper = 0.0;
    let mut last_positive = 0;
    for (i, &w) in p.weights().iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        upper += w;
        last_positive = i;
        if q < upper {
            return Ok(i);
        }
    }
    Ok(last_positive)
}

/// Probability function `(state, broadcast signal) ↦ p`.
pub trait ProbabilityFn: Send + Sync + fmt::Debug {
    /// Number of maps the probabilities are over.
    fn len(&self) -> usize;

    fn evaluate(&self, x: &State, signal: f64) -> Result<ProbabilityVector>;

    /// `Some` when the probabilities don't depend on state or signal.
    fn as_constant(&self) -> Option<&ProbabilityVector> {
        None
    }
}

#[derive(Debug, Clone)]
pub struct ConstantProbabilities(pub ProbabilityVector);

impl ProbabilityFn for ConstantProbabilities {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn evaluate(&self, _x: &State, _signal: f64) -> Result<ProbabilityVector> {
        Ok(self.0.clone())
    }

    fn as_constant(&self) -> Option<&ProbabilityVector> {
        Some(&self.0)
    }
}

/// Two-state switching with `P(0→1) = on_rate` and `P(1→0) = off_rate`.
///
/// Maps are ordered `[x ↦ 0, x ↦ 1]`. Between the two states the on
/// probability is interpolated linearly, which keeps it Lipschitz on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStateSwitching {
    pub on_rate: f64,
    pub off_rate: f64,
}

impl TwoStateSwitching {
    pub fn stationary_on(&self) -> f64 {
        self.on_rate / (self.on_rate + self.off_rate)
    }
}

impl ProbabilityFn for TwoStateSwitching {
    fn len(&self) -> usize {
        2
    }

    fn evaluate(&self, x: &State, _signal: f64) -> Result<ProbabilityVector> {
        let t = x[0].clamp(0.0, 1.0);
        let p_on = self.on_rate + t * ((1.0 - self.off_rate) - self.on_rate);
        ProbabilityVector::on_off(p_on)
    }
}

pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// State-independent on/off response `p_on(π) = 1/(1 + exp(−(slope·π + intercept)))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticOnOff {
    pub slope: f64,
    pub intercept: f64,
}

impl LogisticOnOff {
    pub fn p_on(&self, signal: f64) -> f64 {
        logistic(self.slope * signal + self.intercept)
    }
}

impl ProbabilityFn for LogisticOnOff {
    fn len(&self) -> usize {
        2
    }

    fn evaluate(&self, _x: &State, signal: f64) -> Result<ProbabilityVector> {
        ProbabilityVector::on_off(self.p_on(signal))
    }
}

/// Arbitrary probability function from a closure returning raw weights.
pub struct FnProbabilities<F> {
    n: usize,
    f: F,
}

impl<F> FnProbabilities<F>
where
    F: Fn(&State, f64) -> Vec<f64> + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F> fmt::Debug for FnProbabilities<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnProbabilities").field("n", &self.n).finish_non_exhaustive()
    }
}

impl<F> ProbabilityFn for FnProbabilities<F>
where
    F: Fn(&State, f64) -> Vec<f64> + Send + Sync,
{
    fn len(&self) -> usize {
        self.n
    }

    fn evaluate(&self, x: &State, signal: f64) -> Result<ProbabilityVector> {
        let w = (self.f)(x, signal);
        if w.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: w.len() });
        }
        ProbabilityVector::new(w)
    }
}
