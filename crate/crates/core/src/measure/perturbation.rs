//! Perturbation bound between invariant measures, and the diagnostics that feed it.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ifs::{Norm, State, StateDependentIfs};
use crate::measure::{wasserstein1_1d, wasserstein1_discrete, DiscreteMeasure, EmpiricalMeasure};
use crate::rng::{self, Domain};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationBoundInputs {
    /// Contraction factor of the unperturbed Markov operator in W1.
    pub r: f64,
    /// Lipschitz constant of the test functions.
    pub r_prime: f64,
    /// `sup_x Σ_σ p_σ(x)‖w_σ(x) − w'_σ(x)‖`.
    pub weighted_map_gap: f64,
    /// Sup-norm bound on the (centered) test functions.
    pub beta: f64,
    /// `sup_x Σ_σ |p_σ(x) − p'_σ(x)|`.
    pub eta: f64,
}

impl PerturbationBoundInputs {
    /// `r` may be 0 (a kernel that ignores the state); it must stay below 1.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.r) {
            return Err(Error::Precondition(format!(
                "contraction factor r = {} must lie in [0, 1); without contraction the bound is void",
                self.r
            )));
        }
        for (name, v) in [
            ("r_prime", self.r_prime),
            ("weighted_map_gap", self.weighted_map_gap),
            ("beta", self.beta),
            ("eta", self.eta),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Precondition(format!("{name} = {v} must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

/// `(r′·gap + β·η) / (1 − r)`.
pub fn perturbation_bound(inputs: &PerturbationBoundInputs) -> Result<f64> {
    inputs.validate()?;
    Ok((inputs.r_prime * inputs.weighted_map_gap + inputs.beta * inputs.eta) / (1.0 - inputs.r))
}

fn check_pair(a: &StateDependentIfs, b: &StateDependentIfs) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Precondition(format!("perturbed system has {} maps, original has {}", b.len(), a.len())));
    }
    if a.dim() != b.dim() {
        return Err(Error::Dimension { expected: a.dim(), got: b.dim() });
    }
    Ok(())
}

/// Max over `states` of `Σ_σ p_σ(x)‖w_σ(x) − w'_σ(x)‖`, weights from the original system.
pub fn weighted_map_gap(
    original: &StateDependentIfs,
    perturbed: &StateDependentIfs,
    states: &[State],
    signal: f64,
    norm: Norm,
) -> Result<f64> {
    check_pair(original, perturbed)?;
    let mut sup = 0.0f64;
    for x in states {
        let p = original.probabilities(x, signal)?;
        let gap: f64 = original
            .maps()
            .iter()
            .zip(perturbed.maps())
            .zip(p.weights())
            .map(|((w, w2), pi)| pi * norm.distance(&w.apply(x), &w2.apply(x)))
            .sum();
        sup = sup.max(gap);
    }
    Ok(sup)
}

/// Max over `states` of `Σ_σ |p_σ(x) − p'_σ(x)|`.
pub fn probability_perturbation(
    original: &StateDependentIfs,
    perturbed: &StateDependentIfs,
    states: &[State],
    signal: f64,
) -> Result<f64> {
    check_pair(original, perturbed)?;
    let mut sup = 0.0f64;
    for x in states {
        let d = original.probabilities(x, signal)?.l1_distance(&perturbed.probabilities(x, signal)?);
        sup = sup.max(d);
    }
    Ok(sup)
}

/// Axis-aligned box states are drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl StateBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Dimension { expected: lo.len(), got: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
            return Err(Error::Precondition("state box needs finite bounds with lo ≤ hi".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> State {
        State::from_iterator(self.dim(), self.lo.iter().zip(&self.hi).map(|(a, b)| a + (b - a) * rng::unit(rng)))
    }

    /// Regular grid with `per_axis` points along each coordinate.
    pub fn grid(&self, per_axis: usize) -> Vec<State> {
        let per_axis = per_axis.max(1);
        let total = per_axis.pow(self.dim() as u32);
        (0..total)
            .map(|mut k| {
                State::from_iterator(
                    self.dim(),
                    self.lo.iter().zip(&self.hi).map(|(a, b)| {
                        let i = k % per_axis;
                        k /= per_axis;
                        if per_axis == 1 {
                            0.5 * (a + b)
                        } else {
                            a + (b - a) * i as f64 / (per_axis - 1) as f64
                        }
                    }),
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionEstimate {
    /// The value to use: the smaller of the sampled and analytic figures.
    pub r_hat: f64,
    /// `max W1(K(x), K(y)) / ‖x − y‖` over the sampled pairs.
    pub sampled: f64,
    /// `Σ_σ p_σ‖A_σ‖`, available when the probabilities are constant.
    pub analytic: Option<f64>,
    pub pairs: usize,
}

/// Estimates the W1 contraction factor of the Markov operator at a frozen signal.
///
/// This is an estimate from finitely many pairs, not a certificate.
pub fn estimate_contraction_factor<R: Rng + ?Sized>(
    ifs: &StateDependentIfs,
    sample_pairs: usize,
    signal: f64,
    region: &StateBox,
    rng: &mut R,
    norm: Norm,
) -> Result<ContractionEstimate> {
    if region.dim() != ifs.dim() {
        return Err(Error::Dimension { expected: ifs.dim(), got: region.dim() });
    }
    let mut sampled = 0.0f64;
    let mut pairs = 0;
    for _ in 0..sample_pairs {
        let x = region.sample(rng);
        let y = region.sample(rng);
        let d = norm.distance(&x, &y);
        if d == 0.0 {
            continue;
        }
        let kx = DiscreteMeasure::from_weighted(ifs.transition_kernel(&x, signal)?)?;
        let ky = DiscreteMeasure::from_weighted(ifs.transition_kernel(&y, signal)?)?;
        sampled = sampled.max(wasserstein1_discrete(&kx, &ky, norm)? / d);
        pairs += 1;
    }
    if pairs == 0 {
        return Err(Error::DegenerateSample);
    }
    let analytic = ifs.probability_fn().as_constant().map(|p| {
        ifs.maps().iter().zip(p.weights()).map(|(m, pi)| pi * m.lipschitz(norm)).sum::<f64>()
    });
    let r_hat = analytic.map_or(sampled, |a| a.min(sampled));
    Ok(ContractionEstimate { r_hat, sampled, analytic, pairs })
}

/// Bootstrap standard error of the 1-D empirical W1 between `mu` and `nu`.
pub fn bootstrap_w1_se(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, resamples: usize, seed: u64) -> Result<f64> {
    if resamples < 2 {
        return Err(Error::Precondition("bootstrap needs at least two resamples".into()));
    }
    let draw = |m: &EmpiricalMeasure, r: &mut rng::Stream| -> Result<EmpiricalMeasure> {
        let v = m.values();
        EmpiricalMeasure::from_scalars((0..v.len()).map(|_| v[r.random_range(0..v.len())]).collect())
    };
    let stats: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut r = rng::stream(seed, Domain::Bootstrap, b as u64);
            wasserstein1_1d(&draw(mu, &mut r)?, &draw(nu, &mut r)?)
        })
        .collect::<Result<_>>()?;
    let n = stats.len() as f64;
    let mean = stats.iter().sum::<f64>() / n;
    Ok((stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

/// Diameter of the union of the measures' supports. Exact in one dimension;
/// in higher dimensions the bounding-box diagonal, which can only overstate it.
pub fn support_diameter(measures: &[&EmpiricalMeasure], norm: Norm) -> Result<f64> {
    let dim = measures.first().map(|m| m.dim()).ok_or(Error::DegenerateSample)?;
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for m in measures {
        if m.dim() != dim {
            return Err(Error::Dimension { expected: dim, got: m.dim() });
        }
        for s in m.samples() {
            for c in 0..dim {
                lo[c] = lo[c].min(s[c]);
                hi[c] = hi[c].max(s[c]);
            }
        }
    }
    Ok(norm.distance(&State::from_vec(lo), &State::from_vec(hi)))
}

/// Sampling budget for checking the bound on a concrete pair of systems.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheckSettings {
    pub signal: f64,
    pub region: StateBox,
    pub grid_per_axis: usize,
    pub contraction_pairs: usize,
    pub n_samples: usize,
    pub thinning: usize,
    pub bootstrap: usize,
    /// Multiple of the bootstrap SE allowed on top of the bound.
    pub se_multiplier: f64,
    pub seed: u64,
}

impl BoundCheckSettings {
    pub fn scalar(lo: f64, hi: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            signal: 0.0,
            region: StateBox::interval(lo, hi)?,
            grid_per_axis: 101,
            contraction_pairs: 200,
            n_samples: 20_000,
            thinning: 1,
            bootstrap: 200,
            se_multiplier: 3.0,
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub inputs: PerturbationBoundInputs,
    pub contraction: ContractionEstimate,
    pub bound: f64,
    pub empirical_w1: f64,
    pub bootstrap_se: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Samples both invariant measures and compares their 1-D W1 against the bound.
///
/// Test functions are 1-Lipschitz, so `r′ = 1`; `β` is half the diameter of
/// the combined support.
pub fn check_perturbation_bound(
    original: &StateDependentIfs,
    perturbed: &StateDependentIfs,
    x0: &State,
    settings: &BoundCheckSettings,
) -> Result<BoundCheck> {
    check_pair(original, perturbed)?;
    if original.dim() != 1 {
        return Err(Error::Dimension { expected: 1, got: original.dim() });
    }
    let norm = Norm::Euclidean;
    let mut stream = rng::stream(settings.seed, Domain::Misc, 1);
    let contraction =
        estimate_contraction_factor(original, settings.contraction_pairs, settings.signal, &settings.region, &mut stream, norm)?;
    let burn_in = default_burn_in_or_max(contraction.r_hat);
    let seed_a = rng::derive_seed(settings.seed, 1);
    let seed_b = rng::derive_seed(settings.seed, 2);
    let mu = crate::measure::empirical_invariant(original, x0, settings.signal, burn_in, settings.n_samples, settings.thinning, seed_a)?;
    let nu = crate::measure::empirical_invariant(perturbed, x0, settings.signal, burn_in, settings.n_samples, settings.thinning, seed_b)?;

    let mut states = settings.region.grid(settings.grid_per_axis);
    for m in [&mu, &nu] {
        states.extend(m.samples().map(|s| State::from_row_slice(s)));
    }
    states.sort_by(|a, b| a[0].total_cmp(&b[0]));
    states.dedup();

    let inputs = PerturbationBoundInputs {
        r: contraction.r_hat,
        r_prime: 1.0,
        weighted_map_gap: weighted_map_gap(original, perturbed, &states, settings.signal, norm)?,
        beta: support_diameter(&[&mu, &nu], norm)? / 2.0,
        eta: probability_perturbation(original, perturbed, &states, settings.signal)?,
    };
    let bound = perturbation_bound(&inputs)?;
    let empirical_w1 = wasserstein1_1d(&mu, &nu)?;
    let bootstrap_se = bootstrap_w1_se(&mu, &nu, settings.bootstrap, rng::derive_seed(settings.seed, 3))?;
    let margin = settings.se_multiplier * bootstrap_se;
    Ok(BoundCheck { inputs, contraction, bound, empirical_w1, bootstrap_se, margin, holds: empirical_w1 <= bound + margin })
}

fn default_burn_in_or_max(r_hat: f64) -> usize {
    crate::measure::default_burn_in(r_hat).unwrap_or(10_000)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{on_off_maps, AffineMap, ProbabilityVector};

    fn halves(p: ProbabilityVector, shift: f64) -> StateDependentIfs {
        StateDependentIfs::constant(
            vec![AffineMap::scalar(0.5, shift).unwrap(), AffineMap::scalar(0.5, 0.5 + shift).unwrap()],
            p,
        )
        .unwrap()
    }

    fn inputs(r: f64, r_prime: f64, gap: f64, beta: f64, eta: f64) -> PerturbationBoundInputs {
        PerturbationBoundInputs { r, r_prime, weighted_map_gap: gap, beta, eta }
    }

    #[test]
    fn formula() {
        assert!((perturbation_bound(&inputs(0.5, 0.5, 0.1, 1.0, 0.0)).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(perturbation_bound(&inputs(0.3, 0.5, 0.0, 1.0, 0.0)).unwrap(), 0.0);
        assert!((perturbation_bound(&inputs(0.5, 0.5, 0.0, 1.0, 0.04)).unwrap() - 0.08).abs() < 1e-15);
    }

    #[test]
    fn invalid_inputs() {
        assert!(perturbation_bound(&inputs(1.0, 0.5, 0.1, 1.0, 0.0)).is_err());
        assert!(perturbation_bound(&inputs(0.5, -0.1, 0.1, 1.0, 0.0)).is_err());
        assert!(perturbation_bound(&inputs(0.5, 0.5, f64::NAN, 1.0, 0.0)).is_err());
    }

    #[test]
    fn gap_and_eta() {
        let a = halves(ProbabilityVector::uniform(2), 0.0);
        let b = halves(ProbabilityVector::new(vec![0.52, 0.48]).unwrap(), 0.1);
        let xs = StateBox::interval(0.0, 1.0).unwrap().grid(11);
        assert!((weighted_map_gap(&a, &b, &xs, 0.0, Norm::Euclidean).unwrap() - 0.1).abs() < 1e-12);
        assert!((probability_perturbation(&a, &b, &xs, 0.0).unwrap() - 0.04).abs() < 1e-12);
    }

    #[test]
    fn contraction_single_map() {
        let ifs = StateDependentIfs::constant(vec![AffineMap::scalar(0.5, 0.0).unwrap()], ProbabilityVector::uniform(1)).unwrap();
        let mut r = rng::stream(0, Domain::Misc, 0);
        let est = estimate_contraction_factor(&ifs, 50, 0.0, &StateBox::interval(-1.0, 1.0).unwrap(), &mut r, Norm::Euclidean).unwrap();
        assert!((est.r_hat - 0.5).abs() < 1e-12);
        assert!((est.sampled - 0.5).abs() < 1e-12);
    }

    #[test]
    fn contraction_bernoulli_pair() {
        let ifs = halves(ProbabilityVector::uniform(2), 0.0);
        let mut r = rng::stream(0, Domain::Misc, 0);
        let est = estimate_contraction_factor(&ifs, 50, 0.0, &StateBox::interval(0.0, 1.0).unwrap(), &mut r, Norm::Euclidean).unwrap();
        assert_eq!(est.analytic, Some(0.5));
        assert!((est.r_hat - 0.5).abs() < 1e-12);
    }

    #[test]
    fn contraction_on_off_is_zero() {
        let ifs = StateDependentIfs::constant(on_off_maps(), ProbabilityVector::on_off(0.3).unwrap()).unwrap();
        let mut r = rng::stream(0, Domain::Misc, 0);
        let est = estimate_contraction_factor(&ifs, 20, 0.0, &StateBox::interval(0.0, 1.0).unwrap(), &mut r, Norm::Euclidean).unwrap();
        assert_eq!(est.r_hat, 0.0);
    }

    #[test]
    fn contraction_degenerate_region() {
        let ifs = halves(ProbabilityVector::uniform(2), 0.0);
        let mut r = rng::stream(0, Domain::Misc, 0);
        let res = estimate_contraction_factor(&ifs, 20, 0.0, &StateBox::interval(0.3, 0.3).unwrap(), &mut r, Norm::Euclidean);
        assert!(matches!(res, Err(Error::DegenerateSample)));
    }

    #[test]
    fn canonical_pair_within_bound() {
        // r = 0.5, gap = 0, η = 0.04 on the unit interval
        let a = halves(ProbabilityVector::uniform(2), 0.0);
        let b = halves(ProbabilityVector::new(vec![0.52, 0.48]).unwrap(), 0.0);
        let check = check_perturbation_bound(&a, &b, &State::from_element(1, 0.0), &BoundCheckSettings::scalar(0.0, 1.0, 9).unwrap()).unwrap();
        assert!((check.inputs.eta - 0.04).abs() < 1e-12);
        assert_eq!(check.inputs.weighted_map_gap, 0.0);
        assert!(check.bound <= 0.08 + 1e-12);
        assert!(check.holds, "{check:?}");
    }

    #[test]
    fn shifted_offsets_meet_bound_exactly() {
        // shifting every offset by 0.1 translates the invariant law by 0.2,
        // which is exactly gap/(1 − r) with unit-Lipschitz test functions
        let a = halves(ProbabilityVector::uniform(2), 0.0);
        let b = halves(ProbabilityVector::uniform(2), 0.1);
        let check = check_perturbation_bound(&a, &b, &State::from_element(1, 0.0), &BoundCheckSettings::scalar(0.0, 1.2, 4).unwrap()).unwrap();
        assert!((check.bound - 0.2).abs() < 1e-12);
        assert!(check.holds, "{check:?}");
    }

    #[test]
    fn bootstrap_se_is_small_and_positive() {
        let ifs = halves(ProbabilityVector::uniform(2), 0.0);
        let x0 = State::from_element(1, 0.0);
        let a = crate::measure::empirical_invariant(&ifs, &x0, 0.0, 100, 5_000, 1, 1).unwrap();
        let b = crate::measure::empirical_invariant(&ifs, &x0, 0.0, 100, 5_000, 1, 2).unwrap();
        let se = bootstrap_w1_se(&a, &b, 200, 0).unwrap();
        assert!(se > 0.0 && se < 0.02, "{se}");
    }
}
