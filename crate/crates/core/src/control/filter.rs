use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the observed aggregate `y` is turned into the estimate `ŷ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FilterSpec {
    #[default]
    Identity,
    MovingAverage { window: usize },
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FilterSpec::MovingAverage { window: 0 } => Err(Error::Precondition("moving-average window must be at least 1".into())),
            _ => Ok(()),
        }
    }

    /// How much history the filter ever looks at.
    pub fn memory(&self) -> usize {
        match self {
            FilterSpec::Identity => 1,
            FilterSpec::MovingAverage { window } => (*window).max(1),
        }
    }
}

/// `ŷ` from the `y` history, most recent last.
pub fn filter_step(spec: &FilterSpec, history: &[f64]) -> Result<f64> {
    spec.validate()?;
    let Some(last) = history.last() else {
        return Err(Error::Precondition("filter needs at least one observation".into()));
    };
    Ok(match spec {
        FilterSpec::Identity => *last,
        FilterSpec::MovingAverage { window } => {
            let tail = &history[history.len().saturating_sub(*window)..];
            tail.iter().sum::<f64>() / tail.len() as f64
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        assert_eq!(filter_step(&FilterSpec::Identity, &[1.0, 7200.0]).unwrap(), 7200.0);
    }

    #[test]
    fn moving_average() {
        let ma = |w| FilterSpec::MovingAverage { window: w };
        assert_eq!(filter_step(&ma(3), &[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(filter_step(&ma(5), &[10.0]).unwrap(), 10.0);
        assert_eq!(filter_step(&ma(2), &[100.0, 1.0, 3.0]).unwrap(), 2.0);
        assert!(filter_step(&ma(0), &[1.0]).is_err());
        assert!(filter_step(&ma(2), &[]).is_err());
    }
}
