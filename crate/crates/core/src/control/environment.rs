use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Shifts each count by a uniform integer in `−δ..=δ`, clipped at 0.
pub fn apply_environment_perturbation<R: Rng + ?Sized>(counts: &[u32], delta: u32, rng: &mut R) -> Vec<u32> {
    if delta == 0 {
        return counts.to_vec();
    }
    let d = delta as i64;
    counts
        .iter()
        .map(|c| (*c as i64 + rng.random_range(-d..=d)).max(0) as u32)
        .collect()
}

/// Real-valued variant: shifts by a uniform draw in `[−δ, δ]`, clipped to `[lo, hi]`.
pub fn perturb_real<R: Rng + ?Sized>(values: &[f64], delta: f64, lo: f64, hi: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::Precondition(format!("perturbation bound {delta} must be finite and non-negative")));
    }
    if !(lo <= hi) {
        return Err(Error::Precondition(format!("valid range [{lo}, {hi}] is empty")));
    }
    Ok(values
        .iter()
        .map(|v| (v + delta * (2.0 * rng::unit(rng) - 1.0)).clamp(lo, hi))
        .collect())
}
