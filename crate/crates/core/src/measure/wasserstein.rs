use crate::error::{Error, Result};
use crate::ifs::Norm;
use crate::measure::transport::{solve_transport, DEFAULT_SUPPORT_CAP};
use crate::measure::{DiscreteMeasure, EmpiricalMeasure};

/// Exact W1 between two 1-D empirical measures.
///
/// Equal sample counts use the sorted matching `(1/n) Σ |x₍ᵢ₎ − y₍ᵢ₎|`;
/// otherwise the CDF integral `∫ |F_μ − F_ν|`.
pub fn wasserstein1_1d(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    for m in [mu, nu] {
        if m.dim() != 1 {
            return Err(Error::Dimension { expected: 1, got: m.dim() });
        }
    }
    let mut a = mu.values().to_vec();
    let mut b = nu.values().to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    if a.len() == b.len() {
        let total: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        return Ok(total / a.len() as f64);
    }
    let wa = 1.0 / a.len() as f64;
    let wb = 1.0 / b.len() as f64;
    Ok(cdf_distance(
        &a.iter().map(|x| (*x, wa)).collect::<Vec<_>>(),
        &b.iter().map(|x| (*x, wb)).collect::<Vec<_>>(),
    ))
}

/// `∫ |F_a − F_b| dx` for weighted points sorted by position.
pub fn cdf_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(p), Some(q)) => p.0.min(q.0),
            (Some(p), None) => p.0,
            (None, Some(q)) => q.0,
            (None, None) => unreachable!(),
        };
        if let Some(px) = prev {
            total += (fa - fb).abs() * (x - px);
        }
        while i < a.len() && a[i].0 == x {
            fa += a[i].1;
            i += 1;
        }
        while j < b.len() && b[j].0 == x {
            fb += b[j].1;
            j += 1;
        }
        prev = Some(x);
    }
    total
}

/// Weighted 1-D W1 between discrete measures on the line.
pub fn wasserstein1_line(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    let line = |m: &DiscreteMeasure| -> Result<Vec<(f64, f64)>> {
        if m.dim() != 1 {
            return Err(Error::Dimension { expected: 1, got: m.dim() });
        }
        let mut v: Vec<(f64, f64)> = m.support().iter().map(|s| s[0]).zip(m.weights().iter().copied()).collect();
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(v)
    };
    Ok(cdf_distance(&line(mu)?, &line(nu)?))
}

/// Exact W1 between finite-support measures under `ground` distance, by
/// solving the transportation problem.
pub fn wasserstein1_discrete(mu: &DiscreteMeasure, nu: &DiscreteMeasure, ground: Norm) -> Result<f64> {
    wasserstein1_discrete_capped(mu, nu, ground, DEFAULT_SUPPORT_CAP)
}

pub fn wasserstein1_discrete_capped(mu: &DiscreteMeasure, nu: &DiscreteMeasure, ground: Norm, cap: usize) -> Result<f64> {
    if mu.dim() != nu.dim() {
        return Err(Error::Dimension { expected: mu.dim(), got: nu.dim() });
    }
    let size = mu.len() + nu.len();
    if size > cap {
        return Err(Error::Capacity { size, cap });
    }
    let sol = solve_transport(mu.weights(), nu.weights(), |i, j| ground.distance(&mu.support()[i], &nu.support()[j]))?;
    Ok(sol.cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::State;
    use proptest::prelude::*;

    fn emp(v: &[f64]) -> EmpiricalMeasure {
        EmpiricalMeasure::from_scalars(v.to_vec()).unwrap()
    }

    #[test]
    fn point_masses() {
        assert_eq!(wasserstein1_1d(&emp(&[0.0]), &emp(&[1.0])).unwrap(), 1.0);
        assert_eq!(wasserstein1_1d(&emp(&[0.3, 2.0]), &emp(&[2.0, 0.3])).unwrap(), 0.0);
    }

    #[test]
    fn sorted_coupling() {
        assert!((wasserstein1_1d(&emp(&[0.0, 1.0]), &emp(&[0.5, 0.5])).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unequal_sizes_use_cdf_route() {
        // {0, 1} vs {0.5}: every unit of mass moves 0.5
        assert!((wasserstein1_1d(&emp(&[0.0, 1.0]), &emp(&[0.5])).unwrap() - 0.5).abs() < 1e-15);
        // δ₀ vs {0, 0, 3}: 1/3 of the mass moves 3
        assert!((wasserstein1_1d(&emp(&[0.0]), &emp(&[0.0, 0.0, 3.0])).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn multi_dim_is_rejected() {
        let m = EmpiricalMeasure::new(2, vec![0.0, 0.0]).unwrap();
        assert!(matches!(wasserstein1_1d(&m, &m), Err(Error::Dimension { .. })));
    }

    #[test]
    fn planar_single_pair() {
        let a = DiscreteMeasure::dirac(State::from_vec(vec![0.0, 0.0]));
        let b = DiscreteMeasure::dirac(State::from_vec(vec![3.0, 4.0]));
        assert!((wasserstein1_discrete(&a, &b, Norm::Euclidean).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(wasserstein1_discrete(&a, &a, Norm::Euclidean).unwrap(), 0.0);
    }

    #[test]
    fn one_parameter_family_oracle() {
        // Feasible plans form a one-parameter family; enumerate it on a fine grid.
        let mu = DiscreteMeasure::on_line(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        let nu = DiscreteMeasure::on_line(&[0.0, 1.0], &[0.25, 0.75]).unwrap();
        let best = (0..=10_000)
            .map(|k| {
                // f00 = s, f01 = 0.5 − s, f10 = 0.25 − s, f11 = 0.25 + s with s ∈ [0, 0.25]
                let s = 0.25 * k as f64 / 10_000.0;
                (0.5 - s) + (0.25 - s)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((best - 0.25).abs() < 1e-12);
        assert!((wasserstein1_discrete(&mu, &nu, Norm::Euclidean).unwrap() - best).abs() < 1e-12);
        assert!((wasserstein1_line(&mu, &nu).unwrap() - best).abs() < 1e-12);
    }

    #[test]
    fn capacity_cap() {
        let pts: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let m = DiscreteMeasure::on_line(&pts, &[0.1; 10]).unwrap();
        assert!(matches!(
            wasserstein1_discrete_capped(&m, &m, Norm::Euclidean, 15),
            Err(Error::Capacity { size: 20, cap: 15 })
        ));
    }

    fn arb_sample() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5.0f64..5.0, 1..12)
    }

    proptest! {
        #[test]
        fn metric_axioms(a in arb_sample(), b in arb_sample(), c in arb_sample()) {
            let (a, b, c) = (emp(&a), emp(&b), emp(&c));
            let ab = wasserstein1_1d(&a, &b).unwrap();
            let ba = wasserstein1_1d(&b, &a).unwrap();
            let bc = wasserstein1_1d(&b, &c).unwrap();
            let ac = wasserstein1_1d(&a, &c).unwrap();
            prop_assert!(wasserstein1_1d(&a, &a).unwrap().abs() < 1e-12);
            prop_assert!((ab - ba).abs() < 1e-9);
            prop_assert!(ac <= ab + bc + 1e-9);
        }

        #[test]
        fn lipschitz_duality(a in arb_sample(), b in arb_sample(), slope in -1.0f64..1.0, kink in -5.0f64..5.0) {
            // f(x) = slope·|x − kink| is 1-Lipschitz
            let f = |x: f64| slope * (x - kink).abs();
            let (ma, mb) = (emp(&a), emp(&b));
            let ia = a.iter().map(|x| f(*x)).sum::<f64>() / a.len() as f64;
            let ib = b.iter().map(|x| f(*x)).sum::<f64>() / b.len() as f64;
            prop_assert!((ia - ib).abs() <= wasserstein1_1d(&ma, &mb).unwrap() + 1e-9);
        }

        #[test]
        fn fast_path_matches_cdf_route(mut a in prop::collection::vec(-5.0f64..5.0, 1..12), seed in 0u64..1000) {
            let mut b: Vec<f64> = a.iter().enumerate().map(|(i, x)| x + ((seed + i as u64) % 7) as f64 - 3.0).collect();
            let direct = wasserstein1_1d(&emp(&a), &emp(&b)).unwrap();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            let w = 1.0 / a.len() as f64;
            let cdf = cdf_distance(
                &a.iter().map(|x| (*x, w)).collect::<Vec<_>>(),
                &b.iter().map(|x| (*x, w)).collect::<Vec<_>>(),
            );
            prop_assert!((direct - cdf).abs() < 1e-9);
        }
    }
}
