use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::ifs::{ProbabilityVector, State};

/// How an empirical measure was sampled from a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingMeta {
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
}

/// Uniformly weighted samples, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    dim: usize,
    data: Vec<f64>,
    meta: Option<SamplingMeta>,
}

impl EmpiricalMeasure {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.is_empty() || data.len() % dim != 0 {
            return Err(Error::Precondition(format!(
                "empirical measure needs a non-empty sample set of dimension {dim} (got {} values)",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sample"));
        }
        Ok(Self { dim, data, meta: None })
    }

    pub fn from_scalars(values: Vec<f64>) -> Result<Self> {
        Self::new(1, values)
    }

    pub fn from_states(states: &[State]) -> Result<Self> {
        let dim = states.first().map(|s| s.len()).unwrap_or(0);
        if let Some(s) = states.iter().find(|s| s.len() != dim) {
            return Err(Error::Dimension { expected: dim, got: s.len() });
        }
        Self::new(dim, states.iter().flat_map(|s| s.iter().copied()).collect())
    }

    pub fn with_meta(mut self, meta: SamplingMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn meta(&self) -> Option<SamplingMeta> {
        self.meta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Raw values; for 1-D measures these are the samples themselves.
    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for s in self.samples() {
            for (a, b) in m.iter_mut().zip(s) {
                *a += b;
            }
        }
        let n = self.len() as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    /// Mass on samples satisfying `pred`.
    pub fn mass_where(&self, pred: impl Fn(&[f64]) -> bool) -> f64 {
        self.samples().filter(|s| pred(s)).count() as f64 / self.len() as f64
    }

    /// Collapses repeated samples into a weighted finite-support measure.
    pub fn to_discrete(&self) -> Result<DiscreteMeasure> {
        let mut rows: Vec<&[f64]> = self.samples().collect();
        rows.sort_by(|a, b| lex_cmp(a, b));
        let mut support: Vec<State> = Vec::new();
        let mut counts: Vec<f64> = Vec::new();
        for r in rows {
            match support.last() {
                Some(last) if last.as_slice() == r => *counts.last_mut().unwrap() += 1.0,
                _ => {
                    support.push(State::from_column_slice(r));
                    counts.push(1.0);
                }
            }
        }
        DiscreteMeasure::new(support, ProbabilityVector::normalized(counts)?)
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Probability measure on finitely many distinct points.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    support: Vec<State>,
    weights: ProbabilityVector,
}

impl DiscreteMeasure {
    pub fn new(support: Vec<State>, weights: ProbabilityVector) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::Dimension { expected: support.len(), got: weights.len() });
        }
        let dim = support[0].len();
        if let Some(s) = support.iter().find(|s| s.len() != dim) {
            return Err(Error::Dimension { expected: dim, got: s.len() });
        }
        if support.iter().any(|s| s.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite("support point"));
        }
        let mut sorted: Vec<&[f64]> = support.iter().map(|s| s.as_slice()).collect();
        sorted.sort_by(|a, b| lex_cmp(a, b));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition("support points must be distinct".into()));
        }
        Ok(Self { support, weights })
    }

    /// Merges coinciding points and normalizes the weights.
    pub fn from_weighted(points: Vec<(State, f64)>) -> Result<Self> {
        let mut support: Vec<State> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (x, w) in points {
            match support.iter().position(|s| *s == x) {
                Some(i) => weights[i] += w,
                None => {
                    support.push(x);
                    weights.push(w);
                }
            }
        }
        Self::new(support, ProbabilityVector::normalized(weights)?)
    }

    pub fn dirac(x: State) -> Self {
        Self { support: vec![x], weights: ProbabilityVector::uniform(1) }
    }

    pub fn on_line(points: &[f64], weights: &[f64]) -> Result<Self> {
        Self::new(
            points.iter().map(|p| State::from_element(1, *p)).collect(),
            ProbabilityVector::new(weights.to_vec())?,
        )
    }

    pub fn dim(&self) -> usize {
        self.support[0].len()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[State] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        self.weights.weights()
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, f: impl Fn(&State) -> f64) -> f64 {
        self.support.iter().zip(self.weights()).map(|(x, w)| w * f(x)).sum()
    }
}

pub const MEASURE_SCHEMA: &str = "fairsense-measure/v1";

/// Points with weights, as stored in a measure CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoints {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl WeightedPoints {
    pub fn into_discrete(self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::from_weighted(
            self.points.into_iter().map(State::from_vec).zip(self.weights).collect(),
        )
    }

    pub fn into_empirical(self) -> Result<EmpiricalMeasure> {
        EmpiricalMeasure::new(self.dim, self.points.into_iter().flatten().collect())
    }
}

/// Writes one row per point: `x0,…,x{d-1},weight`.
pub fn write_measure_csv<W: Write>(mut out: W, points: impl Iterator<Item = (Vec<f64>, f64)>, dim: usize) -> Result<()> {
    writeln!(out, "# {MEASURE_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    header.push("weight".into());
    w.write_record(&header)?;
    for (p, weight) in points {
        let mut row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        row.push(weight.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_empirical_csv<W: Write>(out: W, m: &EmpiricalMeasure) -> Result<()> {
    let w = 1.0 / m.len() as f64;
    write_measure_csv(out, m.samples().map(|s| (s.to_vec(), w)), m.dim())
}

pub fn write_discrete_csv<W: Write>(out: W, m: &DiscreteMeasure) -> Result<()> {
    write_measure_csv(
        out,
        m.support().iter().zip(m.weights()).map(|(s, w)| (s.iter().copied().collect(), *w)),
        m.dim(),
    )
}

/// Parses a measure CSV. Columns must be `x0..x{d-1},weight`.
pub fn read_measure_csv<R: Read>(input: R) -> Result<WeightedPoints> {
    let mut r = crate::csvio::reader(input);
    let header = r.headers()?.clone();
    let cols: Vec<&str> = header.iter().collect();
    let dim = match cols.split_last() {
        Some((&"weight", coords)) if !coords.is_empty() => {
            for (i, c) in coords.iter().enumerate() {
                if *c != format!("x{i}") {
                    return Err(Error::Schema(format!("column {i}: expected x{i}, found {c:?}")));
                }
            }
            coords.len()
        }
        _ => return Err(Error::Schema(format!("expected columns x0..,weight; found {cols:?}"))),
    };
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let vals = crate::csvio::parse_row(&rec, &cols, row)?;
        let w = vals[dim];
        if !(w >= 0.0) {
            return Err(Error::Schema(format!("row {}: negative weight {w}", row + 1)));
        }
        weights.push(w);
        points.push(vals[..dim].to_vec());
    }
    if points.is_empty() {
        return Err(Error::Schema("measure file has no rows".into()));
    }
    Ok(WeightedPoints { dim, points, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_validation() {
        assert!(EmpiricalMeasure::from_scalars(vec![]).is_err());
        assert!(EmpiricalMeasure::from_scalars(vec![f64::INFINITY]).is_err());
        assert!(EmpiricalMeasure::new(2, vec![1.0, 2.0, 3.0]).is_err());
        let m = EmpiricalMeasure::new(2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.sample(1), &[2.0, 3.0]);
        assert_eq!(m.mean(), vec![1.0, 2.0]);
    }

    #[test]
    fn discrete_rejects_duplicates_and_merges_weighted() {
        let p = ProbabilityVector::uniform(2);
        assert!(DiscreteMeasure::new(vec![State::zeros(1), State::zeros(1)], p).is_err());
        let m = DiscreteMeasure::from_weighted(vec![
            (State::zeros(1), 0.4),
            (State::zeros(1), 0.2),
            (State::from_element(1, 1.0), 0.4),
        ])
        .unwrap();
        assert_eq!(m.len(), 2);
        assert!((m.weights()[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn collapse_samples() {
        let m = EmpiricalMeasure::from_scalars(vec![1.0, 0.0, 1.0, 1.0]).unwrap().to_discrete().unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.support()[0][0], 0.0);
        assert!((m.weights()[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn csv_roundtrip() {
        let m = DiscreteMeasure::new(
            vec![State::from_vec(vec![0.0, 1.5]), State::from_vec(vec![-2.0, 0.25])],
            ProbabilityVector::new(vec![0.25, 0.75]).unwrap(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_discrete_csv(&mut buf, &m).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("# fairsense-measure/v1\nx0,x1,weight\n"));
        let back = read_measure_csv(&buf[..]).unwrap().into_discrete().unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn csv_schema_errors() {
        assert!(matches!(read_measure_csv("a,b\n1,2\n".as_bytes()), Err(Error::Schema(_))));
        assert!(matches!(read_measure_csv("x0,weight\n".as_bytes()), Err(Error::Schema(_))));
        assert!(matches!(read_measure_csv("x0,weight\n1,abc\n".as_bytes()), Err(Error::Schema(_))));
        assert!(matches!(read_measure_csv("x1,weight\n1,1\n".as_bytes()), Err(Error::Schema(_))));
    }
}
