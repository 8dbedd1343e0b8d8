use crate::error::{Error, Result};
use crate::ifs::probability::sample_index;
use crate::ifs::{State, StateDependentIfs};
use crate::measure::{EmpiricalMeasure, SamplingMeta};
use crate::rng::{self, Domain};

/// Chaos-game sample of the invariant measure at a frozen signal.
///
/// Runs `burn_in` steps from `x0`, then keeps every `thinning`-th state until
/// `n_samples` are collected.
pub fn empirical_invariant(
    ifs: &StateDependentIfs,
    x0: &State,
    signal: f64,
    burn_in: usize,
    n_samples: usize,
    thinning: usize,
    seed: u64,
) -> Result<EmpiricalMeasure> {
    if x0.len() != ifs.dim() {
        return Err(Error::Dimension { expected: ifs.dim(), got: x0.len() });
    }
    if n_samples == 0 || thinning == 0 {
        return Err(Error::Precondition("need at least one sample and a thinning stride of at least 1".into()));
    }
    let mut stream = rng::stream(seed, Domain::Misc, 0);
    let mut x = x0.clone();
    let mut advance = |x: &mut State| -> Result<()> {
        let p = ifs.probabilities(x, signal)?;
        *x = ifs.maps()[sample_index(&p, rng::unit(&mut stream))?].apply(x);
        Ok(())
    };
    for _ in 0..burn_in {
        advance(&mut x)?;
    }
    let mut data = Vec::with_capacity(n_samples * x.len());
    for _ in 0..n_samples {
        for _ in 0..thinning {
            advance(&mut x)?;
        }
        data.extend(x.iter().copied());
    }
    Ok(EmpiricalMeasure::new(x0.len(), data)?.with_meta(SamplingMeta { burn_in, thinning, seed }))
}

/// `max(10, 10·⌈ln 1e-9 / ln r⌉)` steps: enough for a contraction `r` to
/// forget the initial condition to 1e-9.
pub fn default_burn_in(r_hat: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&r_hat) {
        return Err(Error::Domain { value: r_hat, lo: 0.0, hi: 1.0 });
    }
    if r_hat == 0.0 {
        return Ok(10);
    }
    let steps = (1e-9f64.ln() / r_hat.ln()).ceil() as usize;
    Ok((10 * steps).max(10))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{on_off_maps, AffineMap, ProbabilityVector};
    use crate::measure::wasserstein1_1d;

    fn s(v: f64) -> State {
        State::from_element(1, v)
    }

    #[test]
    fn on_off_mass() {
        let ifs = StateDependentIfs::constant(on_off_maps(), ProbabilityVector::on_off(0.6).unwrap()).unwrap();
        let m = empirical_invariant(&ifs, &s(0.0), 0.0, 10, 100_000, 1, 5).unwrap();
        assert!((m.mass_where(|x| x[0] == 1.0) - 0.6).abs() < 0.01);
        assert_eq!(m.meta(), Some(SamplingMeta { burn_in: 10, thinning: 1, seed: 5 }));
    }

    #[test]
    fn contraction_to_fixed_point() {
        let ifs = StateDependentIfs::constant(vec![AffineMap::scalar(0.5, 0.0).unwrap()], ProbabilityVector::uniform(1)).unwrap();
        let m = empirical_invariant(&ifs, &s(1.0), 0.0, 60, 100, 1, 0).unwrap();
        assert!(m.values().iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn bernoulli_convolution() {
        let ifs = StateDependentIfs::constant(
            vec![AffineMap::scalar(0.5, 0.0).unwrap(), AffineMap::scalar(0.5, 0.5).unwrap()],
            ProbabilityVector::uniform(2),
        )
        .unwrap();
        let a = empirical_invariant(&ifs, &s(0.0), 0.0, 100, 100_000, 1, 1).unwrap();
        let b = empirical_invariant(&ifs, &s(0.0), 0.0, 100, 100_000, 1, 2).unwrap();
        assert!((a.mean()[0] - 0.5).abs() < 0.01);
        assert!(wasserstein1_1d(&a, &b).unwrap() < 0.02);
        // the invariant law is uniform on [0, 1]: histogram deciles each near 0.1
        for d in 0..10 {
            let lo = d as f64 / 10.0;
            let mass = a.mass_where(|x| x[0] >= lo && x[0] < lo + 0.1);
            assert!((mass - 0.1).abs() < 0.01, "decile {d}: {mass}");
        }
    }

    #[test]
    fn burn_in_rule() {
        assert_eq!(default_burn_in(0.5).unwrap(), 300);
        assert_eq!(default_burn_in(0.0).unwrap(), 10);
        assert!(default_burn_in(1.0).is_err());
    }
}
