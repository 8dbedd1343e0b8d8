//! Synchronous coupling: two copies of the chain driven by the same map indices.

use rand::Rng;

use crate::error::{Error, Result};
use crate::ifs::probability::sample_index;
use crate::ifs::{Norm, State, StateDependentIfs};
use crate::rng;

/// Distances `d(k) = ‖x(k) − y(k)‖` for `k = 0..=steps`.
///
/// Each `σ_k` is drawn once, from the probabilities at `x(k)`, and applied to
/// both copies, so `x(k) − y(k) = A_{σ_{k-1}}⋯A_{σ_0}(x(0) − y(0))`.
pub fn coupling_distance<R: Rng + ?Sized>(
    ifs: &StateDependentIfs,
    x0: &State,
    y0: &State,
    steps: usize,
    signals: &[f64],
    stream: &mut R,
    norm: Norm,
) -> Result<Vec<f64>> {
    if x0.len() != y0.len() {
        return Err(Error::Dimension { expected: x0.len(), got: y0.len() });
    }
    if x0.len() != ifs.dim() {
        return Err(Error::Dimension { expected: ifs.dim(), got: x0.len() });
    }
    if signals.len() < steps {
        return Err(Error::Precondition(format!("signal sequence has {} entries for {steps} steps", signals.len())));
    }
    let (mut x, mut y) = (x0.clone(), y0.clone());
    let mut out = Vec::with_capacity(steps + 1);
    out.push(norm.distance(&x, &y));
    for &signal in &signals[..steps] {
        let p = ifs.probabilities(&x, signal)?;
        let map = &ifs.maps()[sample_index(&p, rng::unit(stream))?];
        x = map.apply(&x);
        y = map.apply(&y);
        out.push(norm.distance(&x, &y));
    }
    Ok(out)
}

/// Least-squares slope of `ln d(k)` against `k` over the strictly positive entries.
pub fn log_distance_slope(distances: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = distances
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > 0.0 && d.is_finite())
        .map(|(k, d)| (k as f64, d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// First `k` at which `d(k) > λ̂^k · d(0)` (beyond relative slack `tol`).
pub fn first_bound_violation(distances: &[f64], lambda_hat: f64, tol: f64) -> Option<usize> {
    let d0 = *distances.first()?;
    distances
        .iter()
        .enumerate()
        .find(|(k, d)| **d > lambda_hat.powi(*k as i32) * d0 * (1.0 + tol) + f64::MIN_POSITIVE)
        .map(|(k, _)| k)
}
