use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::Trajectory;
use crate::rng::{self, Domain};

pub const DEFAULT_RESAMPLES: usize = 200;

/// Cumulative means `a(k) = (1/(k+1)) Σ_{j≤k} x(j)`.
pub fn running_average(values: &[f64]) -> Vec<f64> {
    let mut sum = 0.0;
    values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            sum += v;
            sum / (k + 1) as f64
        })
        .collect()
}

/// Running average of one coordinate of a trajectory.
pub fn trajectory_running_average(traj: &Trajectory, coordinate: usize) -> Result<Vec<f64>> {
    if coordinate >= traj.last().len() {
        return Err(Error::Dimension { expected: coordinate + 1, got: traj.last().len() });
    }
    Ok(running_average(&traj.coordinate(coordinate)))
}

/// Per-agent long-run averages with 95% block-bootstrap half-widths.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictabilityVector {
    pub r_bar: Vec<f64>,
    pub ci_halfwidth: Vec<f64>,
}

impl PredictabilityVector {
    pub fn len(&self) -> usize {
        self.r_bar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_bar.is_empty()
    }

    /// Largest pairwise difference between agents.
    pub fn pairwise_spread(&self) -> f64 {
        let max = self.r_bar.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.r_bar.iter().copied().fold(f64::INFINITY, f64::min);
        if self.r_bar.is_empty() { 0.0 } else { max - min }
    }

    pub fn mean(&self) -> f64 {
        self.r_bar.iter().sum::<f64>() / self.r_bar.len().max(1) as f64
    }
}

/// Estimates the long-run average of each series after discarding `burn_in` entries.
pub fn estimate_vector<S: AsRef<[f64]>>(series: &[S], burn_in: usize, resamples: usize, seed: u64) -> Result<PredictabilityVector> {
    let mut r_bar = Vec::with_capacity(series.len());
    let mut ci_halfwidth = Vec::with_capacity(series.len());
    for (i, s) in series.iter().enumerate() {
        let s = s.as_ref();
        if s.len() <= burn_in {
            return Err(Error::Precondition(format!("series {i} has {} entries, not more than the burn-in {burn_in}", s.len())));
        }
        let tail = &s[burn_in..];
        r_bar.push(tail.iter().sum::<f64>() / tail.len() as f64);
        ci_halfwidth.push(block_bootstrap_halfwidth(tail, resamples, seed, i as u64)?);
    }
    Ok(PredictabilityVector { r_bar, ci_halfwidth })
}

/// 1.96 × the bootstrap SE of the mean, resampling contiguous blocks of
/// length ⌈√n⌉ so serial correlation is kept inside each block.
pub fn block_bootstrap_halfwidth(values: &[f64], resamples: usize, seed: u64, index: u64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::DegenerateSample);
    }
    if resamples < 2 || values.len() < 2 {
        return Ok(0.0);
    }
    let n = values.len();
    let block = (n as f64).sqrt().ceil() as usize;
    let starts = n - block + 1;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in values {
        prefix.push(prefix.last().unwrap() + v);
    }
    let blocks = n.div_ceil(block);
    let mut r = rng::stream(seed, Domain::Bootstrap, index);
    let means: Vec<f64> = (0..resamples)
        .map(|_| {
            let total: f64 = (0..blocks)
                .map(|_| {
                    let s = r.random_range(0..starts);
                    prefix[s + block] - prefix[s]
                })
                .sum();
            total / (blocks * block) as f64
        })
        .collect();
    let m = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
    Ok(1.96 * var.sqrt())
}

/// `|estimate − oracle| < max(tolerance, 3·half-width)`.
pub fn agrees(estimate: f64, oracle: f64, tolerance: f64, halfwidth: f64) -> bool {
    (estimate - oracle).abs() < tolerance.max(3.0 * halfwidth)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictabilityReport {
    /// One vector per initial condition.
    pub per_condition: Vec<PredictabilityVector>,
    /// Across-condition mean for each agent.
    pub pooled: PredictabilityVector,
    /// Max over agents of the range of estimates across initial conditions.
    pub max_spread: f64,
}

impl PredictabilityReport {
    pub fn holds(&self, tolerance: f64) -> bool {
        self.max_spread < tolerance
    }
}

/// `ensemble[m][i]` is agent `i`'s series under initial condition `m`.
/// `signals[m]`, when given, is the broadcast sequence of condition `m` and
/// must be identical across the ensemble.
pub fn predictability_report<S: AsRef<[f64]>>(
    ensemble: &[Vec<S>],
    signals: Option<&[Vec<f64>]>,
    burn_in: usize,
    resamples: usize,
    seed: u64,
) -> Result<PredictabilityReport> {
    if ensemble.len() < 2 {
        return Err(Error::Config("predictability needs at least two initial conditions".into()));
    }
    let agents = ensemble[0].len();
    if agents == 0 {
        return Err(Error::Config("ensemble has no agents".into()));
    }
    for (m, run) in ensemble.iter().enumerate() {
        if run.len() != agents {
            return Err(Error::Config(format!("initial condition {m} has {} agents, expected {agents}", run.len())));
        }
        for (i, s) in run.iter().enumerate() {
            if s.as_ref().len() != ensemble[0][i].as_ref().len() {
                return Err(Error::Config(format!("initial condition {m}, agent {i}: horizon differs from condition 0")));
            }
        }
    }
    if let Some(sig) = signals {
        if sig.len() != ensemble.len() || sig.iter().any(|s| s != &sig[0]) {
            return Err(Error::Config("broadcast sequences differ across initial conditions".into()));
        }
    }
    let per_condition = ensemble
        .iter()
        .map(|run| estimate_vector(run, burn_in, resamples, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut r_bar = vec![0.0; agents];
    let mut ci = vec![0.0f64; agents];
    let mut max_spread = 0.0f64;
    for i in 0..agents {
        let est: Vec<f64> = per_condition.iter().map(|v| v.r_bar[i]).collect();
        let hi = est.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = est.iter().copied().fold(f64::INFINITY, f64::min);
        max_spread = max_spread.max(hi - lo);
        r_bar[i] = est.iter().sum::<f64>() / est.len() as f64;
        ci[i] = per_condition.iter().map(|v| v.ci_halfwidth[i]).fold(0.0, f64::max);
    }
    Ok(PredictabilityReport {
        per_condition,
        pooled: PredictabilityVector { r_bar, ci_halfwidth: ci },
        max_spread,
    })
}

/// The fair reference `r·1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairnessVector {
    pub r: f64,
}

impl FairnessVector {
    /// Reference at the population mean, the closest fair vector under the 2-norm.
    pub fn population_mean(p: &PredictabilityVector) -> Self {
        Self { r: p.mean() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GapNorm {
    One,
    Two,
    #[default]
    Inf,
}

impl GapNorm {
    pub fn name(self) -> &'static str {
        match self {
            GapNorm::One => "1",
            GapNorm::Two => "2",
            GapNorm::Inf => "inf",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "1" | "one" => Ok(GapNorm::One),
            "2" | "two" => Ok(GapNorm::Two),
            "inf" | "max" => Ok(GapNorm::Inf),
            _ => Err(Error::Config(format!("unknown norm {s:?}; use 1, 2 or inf"))),
        }
    }
}

/// `‖p̂ − r·1‖`.
pub fn fairness_gap(p_hat: &PredictabilityVector, f_hat: &FairnessVector, norm: GapNorm) -> f64 {
    let dev = p_hat.r_bar.iter().map(|v| (v - f_hat.r).abs());
    match norm {
        GapNorm::One => dev.sum(),
        GapNorm::Two => dev.map(|d| d * d).sum::<f64>().sqrt(),
        GapNorm::Inf => dev.fold(0.0, f64::max),
    }
}

pub fn is_epsilon_fair(gap: f64, epsilon: f64) -> bool {
    gap <= epsilon
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentEstimate {
    pub start: usize,
    pub end: usize,
    pub vector: PredictabilityVector,
    /// Segment no longer than its burn-in; the estimate uses the whole segment.
    pub short: bool,
}

/// Per-segment, per-agent averages. `starts` are the first step of each
/// segment; each segment runs to the next start (the last one to the end of
/// the series). `burn_in` entries are dropped at the start of every segment.
pub fn segment_fairness<S: AsRef<[f64]>>(
    series: &[S],
    starts: &[usize],
    burn_in: usize,
    resamples: usize,
    seed: u64,
) -> Result<Vec<SegmentEstimate>> {
    let len = series.first().map(|s| s.as_ref().len()).ok_or_else(|| Error::Config("no agents".into()))?;
    if series.iter().any(|s| s.as_ref().len() != len) {
        return Err(Error::Config("agent series have different lengths".into()));
    }
    if starts.first() != Some(&0) || starts.windows(2).any(|w| w[0] >= w[1]) || starts.last().is_some_and(|s| *s >= len) {
        return Err(Error::Config(format!("segment starts {starts:?} must begin at 0, increase, and lie inside 0..{len}")));
    }
    let mut out = Vec::with_capacity(starts.len());
    for (s, &start) in starts.iter().enumerate() {
        let end = starts.get(s + 1).copied().unwrap_or(len);
        let short = end - start <= burn_in;
        let skip = if short { 0 } else { burn_in };
        let slices: Vec<&[f64]> = series.iter().map(|x| &x.as_ref()[start..end]).collect();
        let vector = estimate_vector(&slices, skip, resamples, rng::derive_seed(seed, s as u64))?;
        out.push(SegmentEstimate { start, end, vector, short });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vector(v: &[f64]) -> PredictabilityVector {
        PredictabilityVector { r_bar: v.to_vec(), ci_halfwidth: vec![0.0; v.len()] }
    }

    #[test]
    fn running_average_examples() {
        assert!(running_average(&[2.5; 10]).iter().all(|a| *a == 2.5));
        let alt: Vec<f64> = (0..100).map(|k| (k % 2) as f64).collect();
        let a = running_average(&alt);
        for m in 1..50 {
            assert_eq!(a[2 * m - 1], 0.5);
        }
    }

    #[test]
    fn cesaro_consistency() {
        let x: Vec<f64> = (0..100_000).map(|k| 1.0 + 1.0 / (k + 1) as f64).collect();
        assert!((running_average(&x).last().unwrap() - 1.0).abs() < 2e-4);
    }

    #[test]
    fn gap_examples() {
        let half = FairnessVector { r: 0.5 };
        for n in [GapNorm::One, GapNorm::Two, GapNorm::Inf] {
            assert_eq!(fairness_gap(&vector(&[0.5, 0.5]), &half, n), 0.0);
        }
        assert!((fairness_gap(&vector(&[0.4, 0.6]), &half, GapNorm::Inf) - 0.1).abs() < 1e-15);
        assert!((fairness_gap(&vector(&[0.4, 0.6]), &half, GapNorm::One) - 0.2).abs() < 1e-15);
        assert!((fairness_gap(&vector(&[0.4, 0.6]), &half, GapNorm::Two) - 0.02f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn epsilon_monotone() {
        let gap = 0.03;
        assert!(!is_epsilon_fair(gap, 0.02));
        assert!([0.03, 0.05, 1.0].iter().all(|e| is_epsilon_fair(gap, *e)));
    }

    #[test]
    fn report_on_contraction_to_zero() {
        let from = |x0: f64| (0..200).map(|k| x0 * 0.5f64.powi(k)).collect::<Vec<_>>();
        let ensemble = vec![vec![from(-1.0)], vec![from(1.0)]];
        let rep = predictability_report(&ensemble, None, 100, 50, 0).unwrap();
        assert!(rep.max_spread < 1e-12);
        assert!(rep.pooled.r_bar[0].abs() < 1e-12);
    }

    #[test]
    fn report_errors() {
        let one = vec![vec![vec![0.0; 10]]];
        assert!(matches!(predictability_report(&one, None, 0, 10, 0), Err(Error::Config(_))));
        let ragged = vec![vec![vec![0.0; 10]], vec![vec![0.0; 10], vec![0.0; 10]]];
        assert!(predictability_report(&ragged, None, 0, 10, 0).is_err());
        let ok = vec![vec![vec![0.0; 10]], vec![vec![0.0; 10]]];
        let sigs = vec![vec![0.0; 9], vec![1.0; 9]];
        assert!(predictability_report(&ok, Some(&sigs), 0, 10, 0).is_err());
    }

    #[test]
    fn permutation_equivariance() {
        let a: Vec<Vec<f64>> = vec![vec![0.0, 1.0, 1.0, 0.0], vec![1.0; 4], vec![0.0; 4]];
        let mut b = a.clone();
        b.rotate_left(1);
        let va = estimate_vector(&a, 0, 20, 1).unwrap();
        let vb = estimate_vector(&b, 0, 20, 1).unwrap();
        let mut rotated = va.r_bar.clone();
        rotated.rotate_left(1);
        assert_eq!(rotated, vb.r_bar);
    }

    #[test]
    fn segments() {
        let s: Vec<f64> = (0..300).map(|k| if k < 100 { 0.0 } else { 1.0 }).collect();
        let seg = segment_fairness(&[s.clone()], &[0, 100], 10, 20, 0).unwrap();
        assert_eq!(seg[0].vector.r_bar[0], 0.0);
        assert_eq!(seg[1].vector.r_bar[0], 1.0);
        assert_eq!((seg[1].start, seg[1].end), (100, 300));
        let single = segment_fairness(&[s.clone()], &[0], 10, 20, 0).unwrap();
        assert_eq!(single[0].vector, estimate_vector(&[s.clone()], 10, 20, rng::derive_seed(0, 0)).unwrap());
        let flagged = segment_fairness(&[s.clone()], &[0, 295], 10, 20, 0).unwrap();
        assert!(flagged[1].short && !flagged[0].short);
        assert!(segment_fairness(&[s], &[5], 10, 20, 0).is_err());
    }

    #[test]
    fn bootstrap_halfwidth_scales() {
        let mut r = rng::stream(0, Domain::Misc, 0);
        let x: Vec<f64> = (0..10_000).map(|_| if rng::unit(&mut r) < 0.5 { 1.0 } else { 0.0 }).collect();
        let h = block_bootstrap_halfwidth(&x, 200, 0, 0).unwrap();
        // iid Bernoulli(0.5): 1.96·0.5/√n ≈ 0.0098
        assert!(h > 0.005 && h < 0.02, "{h}");
        assert_eq!(block_bootstrap_halfwidth(&[1.0; 50], 200, 0, 0).unwrap(), 0.0);
        assert!(agrees(0.51, 0.5, 0.02, 0.0) && !agrees(0.6, 0.5, 0.02, 0.01));
    }
}
