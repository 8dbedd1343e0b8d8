use std::io::{Read, Write};

use crate::csvio;
use crate::error::{Error, Result};
use crate::fairness::{GapNorm, PredictabilityVector};
use crate::ifs::{State, Trajectory};

pub const TRAJECTORY_SCHEMA: &str = "fairsense-trajectory/v1";
pub const FAIRNESS_SCHEMA: &str = "fairsense-fairness/v1";

/// States of one agent over consecutive steps.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSeries {
    pub agent_id: u64,
    pub states: Vec<State>,
}

impl AgentSeries {
    pub fn coordinate(&self, c: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[c]).collect()
    }
}

/// Rows `agent_id,k,x0,…`, grouped by agent in the given order.
pub fn write_trajectory_csv<W: Write>(out: W, agents: &[(u64, &Trajectory)]) -> Result<()> {
    let dim = agents.first().map(|(_, t)| t.last().len()).unwrap_or(1);
    let mut w = csvio::writer(out, TRAJECTORY_SCHEMA)?;
    let mut header = vec!["agent_id".to_string(), "k".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for (id, t) in agents {
        for (k, s) in t.states().iter().enumerate() {
            if s.len() != dim {
                return Err(Error::Dimension { expected: dim, got: s.len() });
            }
            let mut row = vec![id.to_string(), k.to_string()];
            row.extend(s.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_trajectory_csv`]. Each agent's rows must be contiguous
/// with `k = 0, 1, 2, …`.
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Vec<AgentSeries>> {
    let mut r = csvio::reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.len() < 3 {
        return Err(Error::Schema(format!("expected agent_id,k,x0,… but found {} columns", header.len())));
    }
    let mut expected = vec!["agent_id".to_string(), "k".to_string()];
    expected.extend((0..header.len() - 2).map(|i| format!("x{i}")));
    let expected_refs: Vec<&str> = expected.iter().map(String::as_str).collect();
    csvio::expect_header(r.headers()?, &expected_refs)?;

    let mut out: Vec<AgentSeries> = Vec::new();
    for (row, line) in r.records().enumerate() {
        let v = csvio::parse_row(&line?, &expected_refs, row)?;
        let id = csvio::as_index(v[0], "agent_id", row)? as u64;
        let k = csvio::as_index(v[1], "k", row)?;
        if v[2..].iter().any(|x| !x.is_finite()) {
            return Err(Error::Schema(format!("row {}: non-finite state", row + 1)));
        }
        let state = State::from_row_slice(&v[2..]);
        match out.last_mut() {
            Some(a) if a.agent_id == id => {
                if k != a.states.len() {
                    return Err(Error::Schema(format!("row {}, column \"k\": expected {} for agent {id}, found {k}", row + 1, a.states.len())));
                }
                a.states.push(state);
            }
            _ => {
                if out.iter().any(|a| a.agent_id == id) {
                    return Err(Error::Schema(format!("row {}: rows for agent {id} are not contiguous", row + 1)));
                }
                if k != 0 {
                    return Err(Error::Schema(format!("row {}, column \"k\": agent {id} must start at k = 0", row + 1)));
                }
                out.push(AgentSeries { agent_id: id, states: vec![state] });
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Schema("trajectory file has no rows".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FairnessSummary {
    pub norm: GapNorm,
    pub gap: f64,
    pub epsilon: f64,
}

impl FairnessSummary {
    pub fn verdict(&self) -> &'static str {
        if self.gap <= self.epsilon { "PASS" } else { "FAIL" }
    }

    pub fn line(&self) -> String {
        format!("# summary norm={} gap={} epsilon={} verdict={}", self.norm.name(), self.gap, self.epsilon, self.verdict())
    }
}

/// `segments[s]` holds the vector for segment `s`; agent ids are `ids[i]`.
pub fn write_fairness_csv<W: Write>(
    out: W,
    ids: &[u64],
    segments: &[&PredictabilityVector],
    summary: &FairnessSummary,
) -> Result<()> {
    let mut w = csvio::writer(out, FAIRNESS_SCHEMA)?;
    w.write_record(["agent_id", "r_bar", "ci_halfwidth", "segment"])?;
    for (s, v) in segments.iter().enumerate() {
        if v.len() != ids.len() {
            return Err(Error::Dimension { expected: ids.len(), got: v.len() });
        }
        for (i, id) in ids.iter().enumerate() {
            w.write_record(&[id.to_string(), v.r_bar[i].to_string(), v.ci_halfwidth[i].to_string(), s.to_string()])?;
        }
    }
    let mut out = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    writeln!(out, "{}", summary.line())?;
    out.flush()?;
    Ok(())
}
