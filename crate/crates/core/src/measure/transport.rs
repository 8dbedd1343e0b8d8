//! Exact discrete optimal transport.
//!
//! Transportation simplex on a spanning-tree basis: northwest-corner start,
//! potentials `u_i + v_j = c_ij` on basic cells, Dantzig pricing, and a
//! switch to Bland's rule after a run of degenerate pivots so the method can't
//! cycle.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Default cap on `|supp μ| + |supp ν|`.
pub const DEFAULT_SUPPORT_CAP: usize = 2_000;

const MAX_PIVOTS_PER_NODE: usize = 10_000;

#[derive(Debug, Clone)]
pub struct TransportPlan {
    pub cost: f64,
    /// Basic cells `(source, sink, mass)`; includes degenerate zero-mass cells.
    pub flows: Vec<(usize, usize, f64)>,
    pub pivots: usize,
}

/// Minimizes `Σ c_ij f_ij` subject to row sums `supply`, column sums `demand`, `f ≥ 0`.
pub fn solve_transport(supply: &[f64], demand: &[f64], cost: impl Fn(usize, usize) -> f64) -> Result<TransportPlan> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(Error::Precondition("transport needs non-empty marginals".into()));
    }
    for w in supply.iter().chain(demand) {
        if !w.is_finite() || *w < 0.0 {
            return Err(Error::Precondition(format!("marginal weight {w} is not a finite non-negative number")));
        }
    }
    let total_s: f64 = supply.iter().sum();
    let total_d: f64 = demand.iter().sum();
    if (total_s - total_d).abs() > 1e-9 * total_s.max(1.0) {
        return Err(Error::Precondition(format!("unbalanced marginals: {total_s} vs {total_d}")));
    }
    let scale = if total_d > 0.0 { total_s / total_d } else { 1.0 };
    let demand: Vec<f64> = demand.iter().map(|d| d * scale).collect();

    let mut c = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            let v = cost(i, j);
            if !v.is_finite() {
                return Err(Error::NonFinite("transport cost"));
            }
            c[i * n + j] = v;
        }
    }
    let cmax = c.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let eps = 1e-12 * (1.0 + cmax);

    let mut basis = northwest_corner(supply, &demand);
    let nodes = m + n;
    let mut tree = Tree::new(nodes);
    let mut pivots = 0;
    let mut degenerate_run = 0;

    loop {
        tree.rebuild(&basis, m, &c, n)?;

        let bland = degenerate_run > nodes;
        let mut entering: Option<(usize, usize)> = None;
        let mut best = -eps;
        'pricing: for i in 0..m {
            let u = tree.potential[i];
            for j in 0..n {
                let rc = c[i * n + j] - u - tree.potential[m + j];
                if rc < best {
                    entering = Some((i, j));
                    if bland {
                        break 'pricing;
                    }
                    best = rc;
                }
            }
        }
        let Some((ei, ej)) = entering else { break };

        // Cycle: entering cell (+), then the tree path from column ej to row ei
        // with alternating signs starting at −.
        let path = tree.path(m + ej, ei);
        let mut theta = f64::INFINITY;
        let mut leave: Option<usize> = None;
        for (k, &cell) in path.iter().enumerate() {
            if k % 2 == 0 {
                let f = basis[cell].2;
                let better = match leave {
                    None => true,
                    Some(l) => f < theta || (bland && f == theta && key(&basis[cell], n) < key(&basis[l], n)),
                };
                if better {
                    theta = f;
                    leave = Some(cell);
                }
            }
        }
        let leave = leave.expect("cycle has at least one minus cell");
        for (k, &cell) in path.iter().enumerate() {
            let f = &mut basis[cell].2;
            if k % 2 == 0 {
                *f = (*f - theta).max(0.0);
            } else {
                *f += theta;
            }
        }
        basis[leave] = (ei, ej, theta);

        degenerate_run = if theta <= eps { degenerate_run + 1 } else { 0 };
        pivots += 1;
        if pivots > MAX_PIVOTS_PER_NODE * nodes {
            return Err(Error::Precondition(format!("transport simplex did not converge after {pivots} pivots")));
        }
    }

    let cost = basis.iter().map(|(i, j, f)| f * c[i * n + j]).sum();
    Ok(TransportPlan { cost, flows: basis, pivots })
}

fn key(cell: &(usize, usize, f64), n: usize) -> usize {
    cell.0 * n + cell.1
}

/// Initial basic feasible solution with exactly `m + n − 1` cells.
fn northwest_corner(supply: &[f64], demand: &[f64]) -> Vec<(usize, usize, f64)> {
    let (m, n) = (supply.len(), demand.len());
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let mut cells = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let f = s[i].min(d[j]);
        cells.push((i, j, f));
        s[i] -= f;
        d[j] -= f;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 || s[i] <= d[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    cells
}

/// Spanning tree over rows `0..m` and columns `m..m+n`, rooted at row 0.
struct Tree {
    adj: Vec<Vec<(usize, usize)>>,
    parent: Vec<(usize, usize)>,
    depth: Vec<usize>,
    potential: Vec<f64>,
}

impl Tree {
    fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
            parent: vec![(usize::MAX, usize::MAX); nodes],
            depth: vec![usize::MAX; nodes],
            potential: vec![0.0; nodes],
        }
    }

    fn rebuild(&mut self, basis: &[(usize, usize, f64)], m: usize, c: &[f64], n: usize) -> Result<()> {
        self.adj.iter_mut().for_each(Vec::clear);
        for (k, &(i, j, _)) in basis.iter().enumerate() {
            self.adj[i].push((m + j, k));
            self.adj[m + j].push((i, k));
        }
        self.depth.iter_mut().for_each(|d| *d = usize::MAX);
        self.depth[0] = 0;
        self.potential[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        let mut seen = 1;
        while let Some(a) = queue.pop_front() {
            for &(b, cell) in &self.adj[a] {
                if self.depth[b] != usize::MAX {
                    continue;
                }
                self.depth[b] = self.depth[a] + 1;
                self.parent[b] = (a, cell);
                let (i, j, _) = basis[cell];
                let cij = c[i * n + j];
                // rows carry u, columns carry v, with u_i + v_j = c_ij
                self.potential[b] = cij - self.potential[a];
                seen += 1;
                queue.push_back(b);
            }
        }
        if seen != self.adj.len() {
            return Err(Error::Precondition("transport basis lost connectivity".into()));
        }
        Ok(())
    }

    /// Cells on the tree path from `from` to `to`, in order.
    fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let (mut a, mut b) = (from, to);
        let mut head = Vec::new();
        let mut tail = Vec::new();
        while self.depth[a] > self.depth[b] {
            head.push(self.parent[a].1);
            a = self.parent[a].0;
        }
        while self.depth[b] > self.depth[a] {
            tail.push(self.parent[b].1);
            b = self.parent[b].0;
        }
        while a != b {
            head.push(self.parent[a].1);
            a = self.parent[a].0;
            tail.push(self.parent[b].1);
            b = self.parent[b].0;
        }
        head.extend(tail.into_iter().rev());
        head
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn northwest_corner_counts_cells() {
        let cells = northwest_corner(&[0.5, 0.5], &[0.2, 0.3, 0.5]);
        assert_eq!(cells.len(), 4);
        let moved: f64 = cells.iter().map(|c| c.2).sum();
        assert!((moved - 1.0).abs() < 1e-15);
    }

    #[test]
    fn solves_textbook_problem() {
        let costs = [[2.0, 3.0, 1.0], [5.0, 4.0, 8.0], [5.0, 6.0, 8.0]];
        let sol = solve_transport(&[20.0, 30.0, 25.0], &[10.0, 25.0, 40.0], |i, j| costs[i][j]).unwrap();
        // integral vertices suffice, so enumerate every integral plan
        let mut best = f64::INFINITY;
        for a in 0..=20 {
            for b in 0..=(20 - a) {
                let r0 = [a as f64, b as f64, (20 - a - b) as f64];
                for d in 0..=30 {
                    for e in 0..=(30 - d) {
                        let r1 = [d as f64, e as f64, (30 - d - e) as f64];
                        let r2 = [10.0 - r0[0] - r1[0], 25.0 - r0[1] - r1[1], 40.0 - r0[2] - r1[2]];
                        if r2.iter().any(|v| *v < 0.0) || (r2.iter().sum::<f64>() - 25.0).abs() > 1e-9 {
                            continue;
                        }
                        let cost: f64 = (0..3).map(|j| costs[0][j] * r0[j] + costs[1][j] * r1[j] + costs[2][j] * r2[j]).sum();
                        best = best.min(cost);
                    }
                }
            }
        }
        assert!((sol.cost - best).abs() < 1e-9, "simplex {} vs enumeration {best}", sol.cost);
    }

    #[test]
    fn rejects_bad_marginals() {
        assert!(solve_transport(&[], &[1.0], |_, _| 0.0).is_err());
        assert!(solve_transport(&[0.5, 0.5], &[0.9], |_, _| 0.0).is_err());
        assert!(solve_transport(&[-0.5, 1.5], &[1.0], |_, _| 0.0).is_err());
        assert!(solve_transport(&[1.0], &[1.0], |_, _| f64::NAN).is_err());
    }

    proptest::proptest! {
        #[test]
        fn line_costs_match_cdf_formula(
            xs in proptest::collection::vec((-3.0f64..3.0, 0.01f64..1.0), 1..8),
            ys in proptest::collection::vec((-3.0f64..3.0, 0.01f64..1.0), 1..8),
        ) {
            let norm = |v: &[(f64, f64)]| {
                let t: f64 = v.iter().map(|p| p.1).sum();
                let mut out: Vec<(f64, f64)> = v.iter().map(|p| (p.0, p.1 / t)).collect();
                out.sort_by(|a, b| a.0.total_cmp(&b.0));
                out
            };
            let (a, b) = (norm(&xs), norm(&ys));
            let sa: Vec<f64> = a.iter().map(|p| p.1).collect();
            let sb: Vec<f64> = b.iter().map(|p| p.1).collect();
            let sol = solve_transport(&sa, &sb, |i, j| (a[i].0 - b[j].0).abs()).unwrap();
            let oracle = crate::measure::wasserstein::cdf_distance(&a, &b);
            proptest::prop_assert!((sol.cost - oracle).abs() < 1e-9, "{} vs {}", sol.cost, oracle);
        }
    }

    #[test]
    fn degenerate_marginals() {
        let sol = solve_transport(&[0.0, 1.0, 0.0], &[1.0, 0.0], |i, j| (i as f64 - j as f64).abs()).unwrap();
        assert!((sol.cost - 1.0).abs() < 1e-15);
    }
}
