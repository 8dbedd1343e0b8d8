use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gains of `π(k) = γπ(k−1) + κ[e(k) − α e(k−1)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gains {
    pub alpha: f64,
    pub gamma: f64,
    pub kappa: f64,
}

impl Gains {
    /// α = −4.01, γ = 0.99, κ = 0.1.
    pub const REFERENCE: Gains = Gains { alpha: -4.01, gamma: 0.99, kappa: 0.1 };
}

impl Default for Gains {
    fn default() -> Self {
        Self::REFERENCE
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    pub alpha: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub prev_pi: f64,
    pub prev_error: f64,
}

impl ControllerState {
    /// Zero history. Rejects `|γ| > 1`; see [`ControllerState::allow_unstable`].
    pub fn new(gains: Gains) -> Result<Self> {
        let s = Self::allow_unstable(gains)?;
        if gains.gamma.abs() > 1.0 {
            return Err(Error::Precondition(format!(
                "|gamma| = {} exceeds 1: the controller recursion is unstable",
                gains.gamma.abs()
            )));
        }
        Ok(s)
    }

    /// Like [`ControllerState::new`] but accepts any finite γ. Callers should warn.
    pub fn allow_unstable(gains: Gains) -> Result<Self> {
        if ![gains.alpha, gains.gamma, gains.kappa].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("controller gain"));
        }
        Ok(Self { alpha: gains.alpha, gamma: gains.gamma, kappa: gains.kappa, prev_pi: 0.0, prev_error: 0.0 })
    }

    pub fn gains(&self) -> Gains {
        Gains { alpha: self.alpha, gamma: self.gamma, kappa: self.kappa }
    }

    pub fn with_history(mut self, prev_pi: f64, prev_error: f64) -> Self {
        self.prev_pi = prev_pi;
        self.prev_error = prev_error;
        self
    }
}

/// One controller update. The returned state carries `(π, e)` forward.
pub fn controller_step(state: &ControllerState, e: f64) -> Result<(f64, ControllerState)> {
    if !e.is_finite() {
        return Err(Error::NonFinite("error signal"));
    }
    let pi = state.gamma * state.prev_pi + state.kappa * (e - state.alpha * state.prev_error);
    Ok((pi, state.with_history(pi, e)))
}

/// Controller followed by saturation; the clamped value is what the
/// recursion remembers, so the state never winds up past the limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Broadcaster {
    pub state: ControllerState,
    pub lo: f64,
    pub hi: f64,
}

impl Broadcaster {
    pub fn new(state: ControllerState, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Precondition(format!("signal clamp [{lo}, {hi}] is not a valid interval")));
        }
        Ok(Self { state, lo, hi })
    }

    pub fn update(&mut self, e: f64) -> Result<f64> {
        let (raw, next) = controller_step(&self.state, e)?;
        let pi = raw.clamp(self.lo, self.hi);
        self.state = next.with_history(pi, e);
        Ok(pi)
    }
}
