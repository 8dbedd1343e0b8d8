use crate::config::{BehaviorConfig, Curve};

/// Neighbourhood class selecting the response curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Class {
    Few,
    Some,
    Many,
}

/// The three logistic curves plus the class thresholds.
pub type LogisticBehavior = BehaviorConfig;

impl BehaviorConfig {
    pub fn classify(&self, neighbors: u32) -> Class {
        if neighbors <= self.t_few {
            Class::Few
        } else if neighbors >= self.t_many {
            Class::Many
        } else {
            Class::Some
        }
    }

    pub fn curve(&self, class: Class) -> Curve {
        match class {
            Class::Few => self.few,
            Class::Some => self.some,
            Class::Many => self.many,
        }
    }

    pub fn p_on(&self, class: Class, pi: f64) -> f64 {
        self.curve(class).p_on(pi)
    }
}

/// On iff `q < p_class(π)`: the on/off system with maps `{x ↦ 1, x ↦ 0}`.
pub fn classify_and_toss(neighbors: u32, pi: f64, behavior: &LogisticBehavior, q: f64) -> bool {
    q < behavior.p_on(behavior.classify(neighbors), pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{self, Domain};

    #[test]
    fn thresholds() {
        let b = LogisticBehavior::default();
        assert_eq!(b.classify(0), Class::Few);
        assert_eq!(b.classify(2), Class::Few);
        assert_eq!(b.classify(3), Class::Some);
        assert_eq!(b.classify(7), Class::Some);
        assert_eq!(b.classify(8), Class::Many);
    }

    #[test]
    fn saturation_and_ordering() {
        let b = LogisticBehavior::default();
        assert!(classify_and_toss(20, 20_000.0, &b, 0.5));
        for pi in [-20_000.0, -100.0, 0.0, 100.0, 20_000.0] {
            assert!(b.p_on(Class::Few, pi) > b.p_on(Class::Some, pi));
            assert!(b.p_on(Class::Some, pi) > b.p_on(Class::Many, pi));
        }
    }

    #[test]
    fn class_frequencies_at_zero() {
        let b = LogisticBehavior::default();
        let mut r = rng::stream(2, Domain::Misc, 0);
        for (n, want) in [(0, 0.9), (5, 0.5), (10, 0.2)] {
            let on = (0..100_000).filter(|_| classify_and_toss(n, 0.0, &b, rng::unit(&mut r))).count();
            assert!((on as f64 / 1e5 - want).abs() < 0.01, "n={n}: {on}");
        }
    }
}
